use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} = {value} is outside its admissible range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("trajectories are sampled on different time grids")]
    GridMismatch,

    #[error("negative spend {value} at grid node {index}")]
    NegativeSpend { index: usize, value: f64 },

    #[error("relative profit increase is undefined for a zero baseline profit")]
    UndefinedBaseline,

    #[error("network with {nodes} nodes exceeds the exact-solver cap of {cap}")]
    NetworkTooLarge { nodes: usize, cap: usize },

    #[error("non-finite value produced by the integrator at step {step}")]
    NonFinite { step: usize },

    #[error("probability bound violated at step {step}: value {value}")]
    ProbabilityBound { step: usize, value: f64 },

    #[error("forward-backward sweep did not converge after {iterations} iterations (last change {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("shooting root-find stagnated after {iterations} iterations (terminal residual {residual:e})")]
    RootFindFailed { iterations: usize, residual: f64 },

    #[error("shooting supports costate dimension at most {max}, got {dim}")]
    UnsupportedDimension { dim: usize, max: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of an iterative solver (as opposed to bad inputs).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::RootFindFailed { .. }
                | Error::NonFinite { .. }
                | Error::ProbabilityBound { .. }
        )
    }
}
