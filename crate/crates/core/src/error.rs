use thiserror::Error;

/// Errors surfaced by the margin toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation point is a pole of the rational function (|den(s)| = {0:.3e})")]
    PoleEvaluation(f64),
    #[error("root finder failed to converge: {0}")]
    NonConvergence(String),
    #[error("plant has a pole or zero within {tol:.1e} of the imaginary axis: {root}")]
    BoundaryPoleZero { root: String, tol: f64 },
    #[error("plant has no pole in the open right half-plane; delay margin is infinite")]
    StablePlant,
    #[error("polynomial takes negative values on the real axis (min {0:.3e})")]
    NotNonnegative(f64),
    #[error("gain margin parameter must exceed 1 (got {0})")]
    InvalidGain(f64),
    #[error("degenerate margin region: k = 1, phi = 0 and tau = 0")]
    DegenerateRegion,
    #[error("shift touches the forbidden cut at omega = {0}")]
    ShiftHitsCut(f64),
    #[error("shift lies inside a forbidden region at omega = {0}")]
    ShiftHitsRegion(f64),
    #[error("adaptive quadrature failed to reach tolerance {tol:.1e} within {panels} panels")]
    QuadratureFailure { tol: f64, panels: usize },
    #[error("interpolation nodes are not distinct")]
    DuplicateNodes,
    #[error("interpolation problem is infeasible (min eigenvalue {0:.3e})")]
    Infeasible(f64),
    #[error("interpolation problem is too ill-conditioned to solve reliably: {0}")]
    IllConditioned(String),
    #[error("no rational magnitude approximation of the requested degree exists (even eps = {0} is infeasible)")]
    InfeasibleDegree(f64),
    #[error("linear system for the reduced interpolant is singular")]
    SingularSystem,
    #[error("interpolant has more right-half-plane zeros ({zeros}) than the co-invariant subspace can absorb ({capacity})")]
    ZeroCountOverflow { zeros: usize, capacity: usize },
    #[error("plant has no unstable pole")]
    NoUnstablePole,
    #[error("shift is invalid: Re(T0(inf)) = {0} >= 1/2")]
    ShiftInvalid(f64),
    #[error("margin requirements are infeasible even at zero delay")]
    InfeasibleAtZero,
    #[error("interpolant degree reduction failed: {0}")]
    ReductionFailure(String),
    #[error("closed-loop sensitivity has a pole in the closed right half-plane at {0}")]
    UnstableT(String),
    #[error("plant factor failed to cancel in the controller (residual {0:.3e})")]
    CancellationFailure(f64),
    #[error("shift blocks strict properness: Im(T0(inf))^2 + Re(T0(inf)) = {0} > 1/4")]
    ShiftBlocksProperness(f64),
    #[error("verification hypothesis violated: Re(T(inf)) = {0} >= 1/2")]
    HypothesisViolated(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
