use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use laura_core::analysis::{tm_probs_constant_power, tm_probs_laura3_cpr, AnalysisOptions};
use laura_core::channel::{db_to_linear, frame_rng, profile_from_geometry, sample_fading};
use laura_core::harness::random_fading;
use laura_core::power::{optimize_power, optimize_power_single_relay};
use laura_core::schemes::decide;
use laura_core::{ModeTable, NetworkGeometry, PowerBudget, QosTargets, Scheme, SchemeConfig, SecurityClamp};

fn power(c: &mut Criterion) {
    let mut group = c.benchmark_group("power");
    for n in [1usize, 3, 5] {
        let mut rng = frame_rng(1, n as u64);
        let draws: Vec<_> = (0..64).map(|_| random_fading(&mut rng, n)).collect();
        let coop: Vec<usize> = (0..n).collect();
        let budget = PowerBudget::for_relays(n);
        group.bench_with_input(BenchmarkId::new("kkt_solver", n), &draws, |b, draws| {
            b.iter(|| {
                for f in draws {
                    black_box(optimize_power(&coop, f, SecurityClamp::new(1.0, f.strongest_source_relay().1), &budget).unwrap());
                }
            })
        });
    }
    let mut rng = frame_rng(1, 0);
    let draws: Vec<_> = (0..64).map(|_| random_fading(&mut rng, 1)).collect();
    let budget = PowerBudget::for_relays(1);
    group.bench_function("closed_form_single_relay", |b| {
        b.iter(|| {
            for f in &draws {
                black_box(optimize_power_single_relay(0, f, SecurityClamp::new(1.0, f.gamma_s[0]), &budget).unwrap());
            }
        })
    });
    group.finish();
}

fn decisions(c: &mut Criterion) {
    let geometry = NetworkGeometry::new(5, 0.9);
    let profile = profile_from_geometry(&geometry, db_to_linear(15.0)).unwrap();
    let draws: Vec<_> = (0..64).map(|k| sample_fading(&profile, &mut frame_rng(2, k))).collect();
    let mut group = c.benchmark_group("decide");
    for scheme in Scheme::ALL {
        for n_coop in [1, 3] {
            let config = SchemeConfig::new(scheme, 5, n_coop, ModeTable::dvbs2(), QosTargets::default(), PowerBudget::for_relays(5))
                .unwrap()
                .with_mean_source_snr(&profile.mean_s);
            group.bench_function(BenchmarkId::new(scheme.id(), n_coop), |b| {
                b.iter(|| {
                    for f in &draws {
                        black_box(decide(f, &config).unwrap());
                    }
                })
            });
        }
    }
    group.finish();
}

fn analysis(c: &mut Criterion) {
    let table = ModeTable::dvbs2();
    let targets = QosTargets::default();
    let options = AnalysisOptions::default();
    let mut group = c.benchmark_group("analysis");
    group.sample_size(10);
    let p1 = profile_from_geometry(&NetworkGeometry::new(2, 0.9), db_to_linear(10.0)).unwrap();
    group.bench_function("constant_power_nr2", |b| {
        b.iter(|| black_box(tm_probs_constant_power(&p1, &table, &targets, &options).unwrap()))
    });
    let p3 = profile_from_geometry(&NetworkGeometry::new(3, 0.9), db_to_linear(10.0)).unwrap();
    group.bench_function("cpr_nr3", |b| {
        b.iter(|| black_box(tm_probs_laura3_cpr(&p3, &table, &targets, &PowerBudget::for_relays(3), 3, &options).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, power, decisions, analysis);
criterion_main!(benches);
