use thiserror::Error;

/// Errors produced by the model and pipeline operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Input values violate a documented precondition.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Iterative root polishing failed to reach the residual bound.
    #[error("root polishing stalled after {iterations} iterations (scaled residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// The selected detuning root does not satisfy its residual bound.
    #[error("selected detuning root {root} fails the residual bound: {residual:e} > {bound:e}")]
    InvalidRoot { root: f64, residual: f64, bound: f64 },

    /// A spectrum evaluation landed in the unstable regime where the
    /// splitting is undefined.
    #[error("working point (omega_b = {omega_b}, delta_c = {delta_c}, g_lin = {g_lin}) is unstable; the splitting is undefined there")]
    UnstableWorkingPoint { omega_b: f64, delta_c: f64, g_lin: f64 },

    /// A coupling grid point lies beyond the shifted critical coupling.
    #[error("grid coupling {value} exceeds the shifted critical coupling {limit}")]
    GridExceedsCritical { value: f64, limit: f64 },

    /// The inversion bracket does not straddle the target.
    #[error("bracket [{lo}, {hi}] does not straddle the target splitting shift {target}")]
    BracketInvalid { lo: f64, hi: f64, target: f64 },

    /// The cylinder geometry is outside the validated plate regime.
    #[error("cylinder radius {radius} m must be at least {ratio} x thickness ({thickness} m) and {ratio} x separation ({separation} m)")]
    RegimeViolation {
        radius: f64,
        thickness: f64,
        separation: f64,
        ratio: f64,
    },

    /// An interaction range violates the plate-limit assumption.
    #[error("interaction range {lambda} m exceeds the plate-limit bound {max_lambda} m")]
    AssumptionViolation { lambda: f64, max_lambda: f64 },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature error estimate {error_estimate:e} still above tolerance after {cells} cells")]
    QuadratureNonConvergence { error_estimate: f64, cells: usize },

    /// A query point falls outside the tabulated span of a prior bound.
    #[error("lambda = {lambda} m lies outside the span [{lo}, {hi}] of prior bound '{label}'")]
    OutOfRange {
        label: String,
        lambda: f64,
        lo: f64,
        hi: f64,
    },

    /// A prior-bound CSV file is malformed.
    #[error("prior bound csv: {0}")]
    PriorCsv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
