//! Error types shared by the whole crate.

use thiserror::Error;

/// Errors produced by construction and evaluation routines.
#[derive(Error, Debug, Clone)]
pub enum CoreError {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Special-function argument outside the validated range.
    #[error("argument {0} is outside the validated evaluation range")]
    OutOfValidatedRange(f64),

    /// Orthogonality was lost beyond tolerance; a finer quadrature is needed.
    #[error(
        "orthogonality residual {residual:.3e} exceeds {tolerance:.3e}; increase quadrature order"
    )]
    RefinementNeeded { residual: f64, tolerance: f64 },

    /// A discretization window selected no nodes or had zero length.
    #[error("degenerate operator: {0}")]
    DegenerateOperator(String),

    /// The resolvent system `I - sigma K` is numerically singular.
    #[error("I - sigma K is numerically singular (condition estimate {cond:.3e})")]
    NumericallySingular { cond: f64 },

    /// A request would exceed a hard cost guard.
    #[error("cost guard: {0}")]
    CostGuard(String),

    /// The reference point is not a bulk point of the equilibrium measure.
    #[error("not a bulk point: {0}")]
    NotABulkPoint(String),

    /// An iterative optimizer stopped without meeting its tolerance.
    #[error(
        "optimization did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    OptimizationFailed { residual: f64, iterations: usize },

    /// Rejection sampling accepted too few configurations.
    #[error("acceptance starvation: rate {rate:.3e} after {trials} trials; use a milder symbol")]
    AcceptanceStarvation { rate: f64, trials: usize },

    /// Too few samples to form an estimate.
    #[error("insufficient statistics: {got} accepted samples, need at least {need}")]
    InsufficientStatistics { got: usize, need: usize },

    /// The node weights cannot support the requested polynomial degree.
    #[error("numerical degeneracy: effective rank {rank} below requested {requested}")]
    Degeneracy { rank: usize, requested: usize },

    /// The deformed functional came out non-positive.
    #[error("ill-posed deformation: det(I - sigma K) = {0:.3e} <= 0")]
    IllPosedDeformation(f64),
}

pub type Result<T> = std::result::Result<T, CoreError>;
