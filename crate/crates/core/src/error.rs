use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("layout mismatch: {0}")]
    Layout(String),

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("trace {trace} deviates from 1 by more than {tol:e}")]
    Trace { trace: f64, tol: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    Positivity { min_eigenvalue: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("index {index} out of range for dimension {dim}")]
    OutOfRange { index: usize, dim: usize },

    #[error("truncated tail weight {tail:e} exceeds 1e-9; use dim >= {suggested_dim}")]
    Truncation { tail: f64, suggested_dim: usize },

    #[error("padding dimension {pad} too small (edge leakage {leakage:e})")]
    PadTooSmall { pad: usize, leakage: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid phase-space grid: {0}")]
    InvalidGrid(String),

    #[error("grids differ")]
    GridMismatch,

    #[error("Wigner sum has imaginary residue {residue:e}; input is not Hermitian")]
    ImaginaryResidue { residue: f64 },

    #[error("steady state is not unique (pivot ratio {pivot_ratio:e})")]
    NonUniqueSteadyState { pivot_ratio: f64 },

    #[error("detector truncation too small: top level population {population:e}, try dim_a >= {suggested_dim}")]
    DetectorTruncation { population: f64, suggested_dim: usize },

    #[error("observed occupation {observed} exceeds target {target}")]
    Infeasible { observed: f64, target: f64 },

    #[error("observed state is vacuum to within {vacuum_weight}; nothing to strip")]
    Degenerate { vacuum_weight: f64 },

    #[error("effective state is nonphysical (min eigenvalue {min_eigenvalue:e})")]
    NonPhysical { min_eigenvalue: f64 },

    #[error("no fit met the occupation constraint; best residual {best_residual:e}")]
    NoFeasibleFit { best_residual: f64 },

    #[error("field does not decay at the grid boundary (max |W| there {boundary:e})")]
    InsufficientExtent { boundary: f64 },

    #[error("quadrature order guard: mu, nu must be <= 8 (got {mu}, {nu})")]
    CostGuard { mu: usize, nu: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
