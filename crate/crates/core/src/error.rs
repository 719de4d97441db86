use thiserror::Error;

/// Errors produced by the synthesis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("unstable coefficient: Lyapunov operator requires a Hurwitz matrix")]
    UnstableCoefficient,

    #[error("no stabilizing solution: {0}")]
    NoStabilizingSolution(String),

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,

    #[error("unstable system: closed-loop matrix is not Hurwitz")]
    Unstable,

    #[error("infeasible policy: closed-loop H-infinity norm is not below beta")]
    InfeasiblePolicy,

    #[error("marginal policy: H-infinity norm within tolerance of beta")]
    MarginalPolicy,

    #[error("policy outside the closure of the feasible set")]
    OutsideClosure,

    #[error("not single-channel: H2 and H-infinity weights differ")]
    NotSingleChannel,

    #[error("R_infinity is not a scalar multiple of R_2")]
    NotScalarMultiple,

    #[error("finite-difference step too large: perturbed policy leaves the feasible set")]
    StepTooLarge,

    #[error("beta below beta_star: no stabilizing solution of the game Riccati equation")]
    BetaBelowBetaStar,

    #[error("pair (A, B) is not stabilizable")]
    NonStabilizable,

    #[error("{assumption}: {detail}")]
    Assumption { assumption: &'static str, detail: String },

    #[error("X is numerically singular (condition number {0:.3e})")]
    SingularLift(f64),

    #[error("feasible-start sampler failed after {0} trials")]
    SamplerFailed(usize),

    #[error("parse error in {field}: {detail}")]
    Parse { field: String, detail: String },

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
