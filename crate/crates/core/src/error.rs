use thiserror::Error;

/// Errors raised by construction, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("stas violated: cos(phi0) = {cos_phi0} must be below -r/R = {bound}")]
    StasViolated { cos_phi0: f64, bound: f64 },

    #[error("profile is not numerically monotone near phi = {phi}")]
    NonMonotoneProfile { phi: f64 },

    #[error("grid: {0}")]
    Grid(String),

    #[error("field shape mismatch: expected {expected:?}, got {got:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("newton did not converge in {iters} iterations (residual {residual:e}){}", eps_note(*.epsilon))]
    NoConvergence {
        iters: usize,
        residual: f64,
        epsilon: Option<f64>,
    },

    #[error("singular jacobian{}", eps_note(*.epsilon))]
    SingularJacobian { epsilon: Option<f64> },

    #[error("eigen iteration did not converge: residual {residual:e} > {tol:e} after {iters} iterations")]
    EigenNotConverged { tol: f64, iters: usize, residual: f64 },

    #[error("eigenfield not of one sign (min {min:e}, max {max:e})")]
    NonPositiveEigenfield { min: f64, max: f64 },

    #[error("zero field")]
    ZeroField,

    #[error("singular periodic system (pivot {pivot:e} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("zeroth-order coefficient B is not positive (min {min:e}); n below threshold?")]
    NonPositiveB { min: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("config: {0}")]
    Config(String),

    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn eps_note(eps: Option<f64>) -> String {
    match eps {
        Some(e) => format!(" at epsilon = {e}"),
        None => String::new(),
    }
}

impl Error {
    /// Coarse class used for CLI exit codes.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::StasViolated { .. }
                | Error::Grid(_)
                | Error::Shape { .. }
                | Error::Config(_)
                | Error::Format(_)
                | Error::Json(_)
                | Error::NonMonotoneProfile { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::StasViolated { .. } => "stas_violated",
            Error::NonMonotoneProfile { .. } => "non_monotone_profile",
            Error::Grid(_) => "grid",
            Error::Shape { .. } => "shape",
            Error::NoConvergence { .. } => "no_convergence",
            Error::SingularJacobian { .. } => "singular_jacobian",
            Error::EigenNotConverged { .. } => "eigen_not_converged",
            Error::NonPositiveEigenfield { .. } => "non_positive_eigenfield",
            Error::ZeroField => "zero_field",
            Error::SingularSystem { .. } => "singular_system",
            Error::NonPositiveB { .. } => "non_positive_b",
            Error::LinearSolve(_) => "linear_solve",
            Error::Config(_) => "config",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
