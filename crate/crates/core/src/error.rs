use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("derivative order {required} unavailable (field supports up to {available})")]
    DerivativeOrderUnavailable { required: usize, available: usize },

    #[error("field is not 2π-periodic: derivative {order} differs by {mismatch:e} at x = {x}")]
    NonPeriodic { order: usize, x: f64, mismatch: f64 },

    #[error("Gauss-Legendre Newton iteration did not converge for q = {0}")]
    QuadratureNoConvergence(usize),

    #[error("singular {size}x{size} local system")]
    SingularSystem { size: usize },

    #[error("non-diagonalizable mode m = {m} (eigenvalue gap {gap:e})")]
    NonDiagonalizable { m: usize, gap: f64 },

    #[error("system is not hyperbolic: eigenvalue {re} + {im}i")]
    NotHyperbolic { re: f64, im: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value in state at t = {t}")]
    NonFinite { t: f64 },

    #[error("stability violation: nonphysical eigenvalue with Re = {re:e} at mh = {theta}")]
    StabilityViolation { theta: f64, re: f64 },

    #[error("log-log fit failed; samples (mh, value): {samples:?}")]
    FitFailure { samples: Vec<(f64, f64)> },

    #[error("eigenvalue iteration did not converge for a {0}x{0} matrix")]
    EigenNoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
