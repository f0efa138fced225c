//! CSV output. Floats use Rust's shortest round-trip formatting, so equal
//! results give byte-identical files.

use std::io::{self, Write};

use crate::harness::compare::{AnalysisRow, ComparisonRow};
use crate::harness::sweep::SweepResult;
use crate::harness::validate::Check;

fn mode_columns(n_modes: usize) -> impl Iterator<Item = String> {
    (1..=n_modes).map(|n| format!("p_mode_{n}"))
}

fn finish<W: Write>(w: csv::Writer<W>) -> io::Result<()> {
    w.into_inner().map_err(|e| e.into_error())?.flush()
}

/// `scheme, n_coop, gamma_sd_db, eta, eta_stderr, p_outage, p_mode_1..N,
/// security_violations, reliability_violations`
pub fn write_sweep_csv<W: Write>(out: W, result: &SweepResult) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n_modes = result.points.first().map_or(0, |p| p.counts.len() - 1);
    let mut header: Vec<String> = ["scheme", "n_coop", "gamma_sd_db", "eta", "eta_stderr", "p_outage"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend(mode_columns(n_modes));
    header.extend(["security_violations".into(), "reliability_violations".into()]);
    w.write_record(&header)?;
    for p in &result.points {
        let frames = p.frames as f64;
        let mut rec = vec![
            p.scheme.to_string(),
            p.n_coop.to_string(),
            p.gamma_sd_db.to_string(),
            p.eta.to_string(),
            p.eta_stderr.to_string(),
        ];
        rec.extend(p.counts.iter().map(|&c| (c as f64 / frames).to_string()));
        rec.push(p.security_violations.to_string());
        rec.push(p.reliability_violations.to_string());
        w.write_record(&rec)?;
    }
    finish(w)
}

/// `scheme, n_coop, gamma_sd_db, eta, p_outage, p_mode_1..N`
pub fn write_analysis_csv<W: Write>(out: W, rows: &[AnalysisRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n_modes = rows.first().map_or(0, |r| r.distribution.n_modes());
    let mut header: Vec<String> = ["scheme", "n_coop", "gamma_sd_db", "eta", "p_outage"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend(mode_columns(n_modes));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.scheme.to_string(), r.n_coop.to_string(), r.gamma_sd_db.to_string(), r.eta.to_string()];
        rec.extend(r.distribution.probs().iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    finish(w)
}

pub fn write_comparison_csv<W: Write>(out: W, rows: &[ComparisonRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "n_coop",
        "gamma_sd_db",
        "combining",
        "eta_sim",
        "eta_sim_stderr",
        "eta_analytical",
        "relative_gap",
    ])?;
    for r in rows {
        let combining = match r.combining {
            crate::combining::Combining::Exact => "exact",
            crate::combining::Combining::UpperBound => "upper_bound",
        };
        w.write_record([
            r.scheme.to_string(),
            r.n_coop.to_string(),
            r.gamma_sd_db.to_string(),
            combining.to_string(),
            r.eta_sim.to_string(),
            r.eta_sim_stderr.to_string(),
            r.eta_analytical.to_string(),
            r.relative_gap.to_string(),
        ])?;
    }
    finish(w)
}

pub fn write_validation_csv<W: Write>(out: W, checks: &[Check]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["suite", "check", "worst", "tolerance", "cases", "passed"])?;
    for c in checks {
        w.write_record([
            c.suite.to_string(),
            c.name.clone(),
            c.worst.to_string(),
            c.tolerance.to_string(),
            c.cases.to_string(),
            c.passed().to_string(),
        ])?;
    }
    finish(w)
}
