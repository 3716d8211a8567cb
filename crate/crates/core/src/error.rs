use thiserror::Error;

/// Errors raised by the engine. Numerical residuals above tolerance are
/// reported through verification results, never through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is not supported here (need an even n in {1})")]
    Dimension(usize, &'static str),
    #[error("rank mismatch: expected rank {expected}, got {got}")]
    Rank { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("monomial degree {0} exceeds the supported maximum {1}")]
    DegreeOverflow(u32, u32),
    #[error("torsion must be totally antisymmetric for the spin module (residual {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("torsion must be antisymmetric in its first two indices (residual {0:.3e})")]
    NotTorsion(f64),
    #[error("wrong Clifford module: {0}")]
    ModuleKind(String),
    #[error("principal symbol is not elliptic of Laplace type: {0}")]
    NotElliptic(String),
    #[error("symbol truncation too shallow: {0}")]
    Truncation(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("grading is incompatible with the perturbation: {0}")]
    Grading(String),
    #[error("scenario: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
