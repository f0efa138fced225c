//! Experiment runner: configuration, Monte-Carlo sweeps with constraint
//! audits, analytical sweeps, their comparison, the oracle suites and CSV
//! output.

mod compare;
mod config;
mod output;
mod sweep;
mod validate;

pub use compare::{analysis_kind, analyze, compare_analysis, AnalysisKind, AnalysisRow, ComparisonRow};
pub use config::{default_grid_db, ExperimentConfig, Network};
pub use output::{write_analysis_csv, write_comparison_csv, write_sweep_csv, write_validation_csv};
pub use sweep::{audit_frame, eta_with_stderr, run_sweep, simulate_point, AuditRecord, SweepPoint, SweepResult};
pub use validate::{
    fit_roundtrip, laplace_known_pairs, pdf_normalization, power_oracle, random_fading, validate_all, Check,
    ValidationOptions,
};
