use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Feller condition violated: 2*kappa*eta = {lhs} <= sigma^2 = {rhs}")]
    FellerViolation { lhs: f64, rhs: f64 },

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("barrier {barrier} must lie in (0, K = {strike})")]
    Barrier { barrier: f64, strike: f64 },

    #[error("unknown benchmark case {0} (expected 1..=4)")]
    UnknownCase(u32),

    #[error("point outside the option's domain: {0}")]
    Domain(String),

    #[error("stencil index {index} lacks neighbours on a mesh with {nodes} nodes")]
    Index { index: usize, nodes: usize },

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is numerically singular at pivot {0}")]
    SingularMatrix(usize),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("quadrature did not reach tolerance: {0}")]
    Quadrature(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for input-validation failures as opposed to numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::FellerViolation { .. }
                | Error::Range(_)
                | Error::Barrier { .. }
                | Error::UnknownCase(_)
                | Error::Domain(_)
                | Error::Config(_)
        )
    }
}
