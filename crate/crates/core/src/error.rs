//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid needs at least {needed} nodes on axis {axis}, got {got}")]
    InvalidGrid {
        axis: u8,
        needed: usize,
        got: usize,
    },

    #[error("non-finite value {value} sampled at node ({i},{j}) = ({x},{y})")]
    Sampling {
        i: usize,
        j: usize,
        x: f64,
        y: f64,
        value: f64,
    },

    #[error("quadrature did not reach tolerance {tol:e}; last two estimates {prev:e}, {last:e}")]
    QuadratureFailure { tol: f64, prev: f64, last: f64 },

    #[error("bracket [{lo},{hi}] does not straddle the target {target}")]
    Bracket { lo: f64, hi: f64, target: f64 },

    #[error("inversion stalled: |F(t)-y| = {residual:e} above tolerance {tol:e} at t = {t}")]
    InversionFailure { t: f64, residual: f64, tol: f64 },

    #[error("no sign change of the function on [{a},{b}]")]
    NoSignChange { a: f64, b: f64 },

    #[error("numeric failure in {what}: {value}")]
    Numeric { what: &'static str, value: f64 },

    #[error("ODE state non-finite at t = {t} (step {step})")]
    OdeBlowUp { t: f64, step: usize },

    #[error("point ({x},{y}) outside the domain of {what}")]
    OutsideDomain { what: &'static str, x: f64, y: f64 },

    #[error("argument {t} outside the tabulated range [{lo},{hi}]")]
    OutOfTable { t: f64, lo: f64, hi: f64 },

    #[error("convexity monitor: u11 = {value} <= 0 at node ({i},{j}) inside the cutoff component")]
    Monitor { i: usize, j: usize, value: f64 },

    #[error("zero crossing not found up to t = {cap}")]
    CrossingNotFound { cap: f64 },

    #[error("empty domain: {{w < 0}} has no grid node in the bounding box")]
    EmptyDomain,

    #[error("configuration: {0}")]
    Config(String),

    #[error("positivity: A{axis} = {value:e} <= floor {floor:e} at node ({i},{j})")]
    Positivity {
        axis: u8,
        i: usize,
        j: usize,
        value: f64,
        floor: f64,
    },

    #[error("linear solve stagnated: relative residual {rel:e} after {iters} iterations")]
    LinearSolve { rel: f64, iters: usize },

    #[error("newton stage failed at eps = {eps}, t = {t}: {reason}")]
    StageFailure { eps: f64, t: f64, reason: String },
}
