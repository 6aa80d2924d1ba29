use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (left dim {left}, right dim {right})")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("vector must have at least one coordinate")]
    EmptyVector,

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not positive semidefinite (<Mx, x> = {quadratic_form:e} at a sampled x)")]
    NotPositiveSemidefinite { quadratic_form: f64 },

    #[error("singular linear system in resolvent solve")]
    SingularSystem,

    #[error("power iteration did not converge in {iterations} iterations (last estimate {last_estimate:e})")]
    NormNotConverged {
        iterations: usize,
        last_estimate: f64,
    },

    #[error("operator is zero; admissible step range is unbounded")]
    ZeroOperator,

    #[error("sampler produced only coincident pairs after {attempts} attempts")]
    DegenerateSampling { attempts: usize },

    #[error("schedule `{schedule}` emitted {value:e} at n = {n}, outside its declared range [{lo:e}, {hi:e}]")]
    ScheduleOutOfRange {
        schedule: String,
        n: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("non-finite value at stage `{stage}`")]
    Divergence { stage: Stage },

    #[error("divergence guard tripped at iteration {n}: {what} = {value:e} exceeds {guard:e}")]
    GuardExceeded {
        n: usize,
        what: &'static str,
        value: f64,
        guard: f64,
    },

    #[error("trace is missing {what}")]
    IncompleteTrace { what: &'static str },

    #[error("trace too short: {len} records, need at least {needed}")]
    TraceTooShort { len: usize, needed: usize },
}

/// Stage of an iteration step where a non-finite value appeared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    W,
    Y,
    XNext,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::W => "w",
            Stage::Y => "y",
            Stage::XNext => "x_next",
        })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
