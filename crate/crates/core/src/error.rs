use thiserror::Error;

/// Errors raised by the photon-statistics pipelines.
///
/// Every variant names the module that raised it so batch front ends can
/// report where a run failed without inspecting the message text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{module}: {what} out of domain (got {value})")]
    Domain {
        module: &'static str,
        what: &'static str,
        value: f64,
    },

    #[error("core: invalid covariance state: {reason}")]
    InvalidState { reason: String },

    #[error("{module}: precondition violated: {reason}")]
    Precondition {
        module: &'static str,
        reason: String,
    },

    #[error("dynamics: integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("dynamics: assembled state is inconsistent ({reason}); tighten the integration tolerance")]
    NumericalConsistency { reason: String },

    #[error("{module}: wrong regime: {reason}")]
    Regime {
        module: &'static str,
        reason: String,
    },

    #[error("{module}: precision loss: {reason}")]
    Precision {
        module: &'static str,
        reason: String,
    },

    #[error("oracle: truncation deficit {deficit:e} exceeds limit at dim = {dim}; increase the dimension")]
    Truncation { dim: usize, deficit: f64 },

    #[error("{module}: {quantity} overflows the representable range (ln = {ln_value})")]
    Range {
        module: &'static str,
        quantity: &'static str,
        ln_value: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(module: &'static str, what: &'static str, value: f64) -> Self {
        Error::Domain {
            module,
            what,
            value,
        }
    }

    pub(crate) fn precondition(module: &'static str, reason: impl Into<String>) -> Self {
        Error::Precondition {
            module,
            reason: reason.into(),
        }
    }

    pub(crate) fn regime(module: &'static str, reason: impl Into<String>) -> Self {
        Error::Regime {
            module,
            reason: reason.into(),
        }
    }

    /// Module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Domain { module, .. }
            | Error::Precondition { module, .. }
            | Error::Regime { module, .. }
            | Error::Precision { module, .. }
            | Error::Range { module, .. } => module,
            Error::InvalidState { .. } => "core",
            Error::Integration { .. } | Error::NumericalConsistency { .. } => "dynamics",
            Error::Truncation { .. } => "oracle",
        }
    }
}
