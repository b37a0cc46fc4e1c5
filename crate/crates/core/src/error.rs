use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular operator: zeroth-order coefficient and boundary coefficient both vanish identically")]
    SingularOperator,

    #[error("field length {found} does not match grid with {expected} nodes")]
    Mismatch { expected: usize, found: usize },

    #[error("linear solve failed: residual {residual:e} exceeds tolerance {tolerance:e}")]
    LinearSolve { residual: f64, tolerance: f64 },

    #[error("nonlinear iteration did not converge after {iterations} iterations (last step {last_step:e}, residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        last_step: f64,
        residual: f64,
        step_history: Vec<f64>,
    },

    #[error("discretization failure: {0}; refine the grid")]
    Discretization(String),

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),
}
