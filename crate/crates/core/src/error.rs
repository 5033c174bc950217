use thiserror::Error;

/// Everything that can go wrong between a parameter set and a correlation trace.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Mathieu truncation did not converge for q = {q} (order {order}); last coefficient ratio {residual:e}")]
    Convergence { q: f64, order: usize, residual: f64 },

    #[error("singular steady-state block {block}: {detail}")]
    SingularBlock { block: &'static str, detail: String },

    #[error("degenerate {kind} collapse: the collapsed state has zero norm")]
    DegenerateCollapse { kind: &'static str },

    #[error("degenerate denominator for {what}: steady-state value {value:e}")]
    DegenerateDenominator { what: String, value: f64 },

    #[error("quadrature sum has imaginary part {imag:e} where a real value was required")]
    ComplexQuadrature { imag: f64 },

    #[error("Liouvillian null space has dimension {dim}, expected 1")]
    DegenerateSteadyState { dim: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
