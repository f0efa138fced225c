use thiserror::Error;

/// Errors produced by the LAURA library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid network geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid average SNR profile: {0}")]
    InvalidProfile(String),

    #[error("invalid transmission mode: {0}")]
    InvalidMode(String),

    #[error("fit branches do not cross on [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("BER {pe} outside the invertible range of the fit: {reason}")]
    BerOutOfRange { pe: f64, reason: &'static str },

    #[error("invalid QoS targets: {0}")]
    InvalidTargets(String),

    #[error("no power allocated for cooperating relay {0}")]
    MissingRelayPower(usize),

    #[error("infeasible power budget: {0}")]
    InfeasibleBudget(String),

    #[error("constant-power-relay allocation infeasible: total {total} <= {n_coop} relays")]
    InfeasibleCpr { total: f64, n_coop: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    #[error("root finding failed: {0}")]
    RootNotBracketed(String),

    #[error("Laplace inversion failed at z = {z}: value {value}")]
    InversionFailure { z: f64, value: f64 },

    #[error("analysis does not cover {0}")]
    UnsupportedAnalysis(String),

    #[error("frame {frame}: {source}")]
    Frame {
        frame: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of a numerical kernel (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::QuadratureNonConvergence { .. }
            | Error::RootNotBracketed(_)
            | Error::InversionFailure { .. } => true,
            Error::Frame { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
