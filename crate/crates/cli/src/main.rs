//! `laura`: sweeps, analysis, comparisons, audits and oracle suites from a
//! TOML experiment file.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error,
//! 3 numerical failure (including a failed validation check), 4 constraint
//! violation found by `audit`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use laura_core::analysis::{AnalysisOptions, Conditioning, ModeEvents};
use laura_core::harness::{
    analyze, compare_analysis, run_sweep, validate_all, write_analysis_csv, write_comparison_csv, write_sweep_csv,
    write_validation_csv, ExperimentConfig, ValidationOptions,
};
use laura_core::{Error, ModeTable};

#[derive(Parser)]
#[command(name = "laura", version, about = "Link adaptation with untrusted relays: simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep, one CSV row per (scheme, N_C, SNR).
    Sweep(RunArgs),
    /// Semi-analytical mode probabilities and spectral efficiency.
    Analyze {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Analysis next to a like-for-like simulation, with relative gaps.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Sweep and report constraint violations; exits with 4 if any.
    Audit(RunArgs),
    /// Oracle suites: power vs grid, fit round trip, PDF mass, Laplace pairs.
    Validate {
        /// Random realizations per cooperating-set size.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Mode table CSV; the built-in table otherwise.
        #[arg(long)]
        modes_csv: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment file (TOML).
    config: PathBuf,
    /// Write CSV here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Override the number of frames per point.
    #[arg(long)]
    frames: Option<u64>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct AnalysisArgs {
    #[arg(long, value_enum, default_value_t = ConditioningArg::Exact)]
    conditioning: ConditioningArg,
    #[arg(long, value_enum, default_value_t = EventsArg::Nested)]
    events: EventsArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditioningArg {
    Exact,
    ProductOfMarginals,
}

#[derive(Clone, Copy, ValueEnum)]
enum EventsArg {
    Nested,
    Union,
}

impl AnalysisArgs {
    fn options(&self) -> AnalysisOptions {
        AnalysisOptions::default()
            .with_conditioning(match self.conditioning {
                ConditioningArg::Exact => Conditioning::Exact,
                ConditioningArg::ProductOfMarginals => Conditioning::ProductOfMarginals,
            })
            .with_events(match self.events {
                EventsArg::Nested => ModeEvents::Nested,
                EventsArg::Union => ModeEvents::Union,
            })
    }
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig::from_path(&self.config)?)
    }
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = self.config.load()?;
        if let Some(f) = self.frames {
            c.frames = f;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        c.validate().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        Ok(c)
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep(args) => {
            let config = args.load()?;
            let result = run_sweep(&config)?;
            write_sweep_csv(open_output(&args.config.output)?, &result)?;
        }
        Command::Analyze { config, analysis } => {
            let c = config.load()?;
            let rows = analyze(&c, &analysis.options())?;
            write_analysis_csv(open_output(&config.output)?, &rows)?;
        }
        Command::Compare { run, analysis } => {
            let c = run.load()?;
            let rows = compare_analysis(&c, &analysis.options())?;
            write_comparison_csv(open_output(&run.config.output)?, &rows)?;
        }
        Command::Audit(args) => {
            let config = args.load()?;
            let result = run_sweep(&config)?;
            write_sweep_csv(open_output(&args.config.output)?, &result)?;
            let bad: Vec<_> = result.points.iter().filter(|p| p.violations() > 0).collect();
            for p in &bad {
                eprintln!(
                    "violation: {} N_C={} at {} dB: {} security, {} reliability in {} frames",
                    p.scheme, p.n_coop, p.gamma_sd_db, p.security_violations, p.reliability_violations, p.frames
                );
            }
            if !bad.is_empty() {
                return Ok(ExitCode::from(4));
            }
            eprintln!("audit clean: {} points, {} frames each", result.points.len(), config.frames);
        }
        Command::Validate {
            samples,
            seed,
            modes_csv,
            output,
        } => {
            let table = match modes_csv {
                Some(p) => ModeTable::from_path(&p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
                None => ModeTable::dvbs2(),
            };
            let checks = validate_all(&table, &ValidationOptions { samples, seed })?;
            write_validation_csv(open_output(&output)?, &checks)?;
            let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).collect();
            for c in &failed {
                eprintln!("failed: {} {}: {:e} > {:e}", c.suite, c.name, c.worst, c.tolerance);
            }
            if !failed.is_empty() {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 2,
        Some(e) if e.is_numerical() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
