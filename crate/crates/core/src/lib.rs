//! Link adaptation with untrusted relay assignment (LAURA) for
//! amplify-and-forward cooperative networks.
//!
//! A source S reaches a destination D directly and through a subset of
//! `N_R` relays that must not be able to decode the message. Per frame, the
//! schemes pick a transmission mode, the cooperating relays and the
//! source/relay powers so that every relay sees a BER at or above a floor
//! (security) while the destination's MRC output meets a BER ceiling
//! (reliability), maximizing the rate.
//!
//! Modules, bottom-up:
//!
//! - [`channel`]: geometry, average SNRs, Rayleigh-fading draws
//! - [`modes`]: mode table, BER fit and its inverse, SNR thresholds
//! - [`combining`]: AF dual-hop and MRC equivalent SNR
//! - [`power`]: per-frame power allocation (KKT solver, closed form, oracle)
//! - [`schemes`]: the six decision engines
//! - [`analysis`]: semi-analytical mode probabilities and spectral efficiency
//! - [`harness`]: Monte-Carlo sweeps, audits, configuration, CSV output

pub mod analysis;
pub mod channel;
pub mod combining;
pub mod error;
pub mod harness;
pub mod modes;
pub mod numeric;
pub mod power;
pub mod schemes;

pub use channel::{AverageSnrProfile, FadingRealization, NetworkGeometry};
pub use combining::{Combining, PowerAllocation, PowerBudget};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, SweepResult};
pub use modes::{BerFit, ModeTable, ModeThresholds, QosTargets, TransmissionMode};
pub use power::SecurityClamp;
pub use schemes::{RelaySelection, Scheme, SchemeConfig, SchemeDecision};
