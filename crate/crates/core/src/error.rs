use thiserror::Error;

use crate::exprlang::EvalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("cannot evaluate {what} at {point:?}: {source}")]
    Eval { what: String, point: Vec<f64>, source: EvalError },
    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("torsion is not antisymmetric at {point:?} (residual {residual:.3e})")]
    TorsionNotAntisymmetric { point: Vec<f64>, residual: f64 },
    #[error("{which} is not an orthogonal complex structure at {point:?} (residual {residual:.3e})")]
    InvalidComplexStructure { which: String, point: Vec<f64>, residual: f64 },
    #[error("triple is not quaternionic at {point:?} (residual {residual:.3e})")]
    InvalidTriple { point: Vec<f64>, residual: f64 },
    #[error("{0} requires an almost complex structure on the base")]
    MissingAcs(&'static str),
    #[error("{0} requires a quaternionic triple on the base")]
    MissingTriple(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("frame is undefined on the zero section")]
    ZeroSection,
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
