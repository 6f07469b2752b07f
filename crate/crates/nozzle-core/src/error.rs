use thiserror::Error;

/// Errors raised by the solver library.
///
/// Guard-type errors (`NonPhysicalState`, `AxialVelocityDegenerate`,
/// `ForwardFlowLost`, `GuardViolated`, `BoundaryEscaped`) signal that an
/// iterate has left the regime where the closures are valid. They are never
/// clamped away: the iteration driver records them as divergence.
#[derive(Debug, Clone, Error)]
pub enum SolverError {
    /// Stagnation-energy violation: the density closure was evaluated outside
    /// its domain (radicand <= 0 or entropy <= 0).
    #[error("non-physical state: {context} (radicand {radicand:.6e}, entropy {entropy:.6e})")]
    NonPhysicalState {
        context: &'static str,
        radicand: f64,
        entropy: f64,
    },

    /// The axial part of the velocity dropped below the forward-flow guard
    /// while evaluating the vorticity source.
    #[error("axial velocity degenerate: q1+r2 = {value:.6e} below guard {guard:.6e}")]
    AxialVelocityDegenerate { value: f64, guard: f64 },

    /// Axial mass flux fell below the forward-flow guard while building the
    /// stream function.
    #[error("forward flow lost: axial mass flux {value:.6e} below guard {guard:.6e}")]
    ForwardFlowLost { value: f64, guard: f64 },

    /// A field strayed outside the band the free-boundary update assumes.
    #[error("guard violated in {context}: deviation {value:.6e} exceeds {bound:.6e}")]
    GuardViolated {
        context: &'static str,
        value: f64,
        bound: f64,
    },

    /// The free boundary left the admissible band sup|f| < 1/4.
    #[error("free boundary escaped: sup|f| = {sup:.6e} >= 1/4")]
    BoundaryEscaped { sup: f64 },

    /// The curve violates f(0)=0, f'(0)=f'(L)=0 beyond tolerance.
    #[error("compatibility violated: {context} = {value:.6e} exceeds {tol:.6e}")]
    CompatibilityViolated {
        context: &'static str,
        value: f64,
        tol: f64,
    },

    /// The boundary curve reaches the top wall (1 - f <= 0 somewhere).
    #[error("degenerate boundary: 1 - f = {margin:.6e} at x1 = {x1:.6}")]
    DegenerateBoundary { margin: f64, x1: f64 },

    /// The iterative linear solver failed to reach its residual tolerance.
    #[error("linear solver diverged: residual {residual:.6e} after {iterations} iterations (target {target:.6e})")]
    SolverDiverged {
        residual: f64,
        iterations: usize,
        target: f64,
    },

    /// An outer/middle/inner loop hit its iteration cap before converging.
    #[error("iteration cap reached at level {level}: change {change:.6e} after {cap} cycles (target {target:.6e})")]
    CapReached {
        level: &'static str,
        change: f64,
        cap: usize,
        target: f64,
    },

    /// Inlet profile construction or validation failed.
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    /// Domain or grid parameters out of range.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// Gas parameters out of range.
    #[error("invalid gas parameters: {0}")]
    InvalidGas(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;
