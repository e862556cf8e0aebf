use crate::state::State;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state ({}, {}) is outside the model domain", .0.u, .0.v)]
    Domain(State),

    #[error("system is not strictly hyperbolic at ({}, {}): discriminant {disc:e}", state.u, state.v)]
    Hyperbolicity { state: State, disc: f64 },

    #[error("graph condition fails at ({}, {}): |F_v| = {value:e}", state.u, state.v)]
    GraphCondition { state: State, value: f64 },

    #[error("continuation failed: {0}")]
    Continuation(String),

    #[error("Hugoniot gradient vanishes away from the given state at ({}, {}): |grad H| = {norm:e}", state.u, state.v)]
    RegularManifold { state: State, norm: f64 },

    #[error("shock speed undefined for coincident states")]
    DegenerateJump,

    #[error("Rankine-Hugoniot quotients disagree: {from_u} vs {from_v}")]
    InconsistentJump { from_u: f64, from_v: f64 },

    /// Genuine nonlinearity breaks down along a rarefaction; the curve traced
    /// up to the breach is attached.
    #[error("characteristic speed stops being monotone at ({}, {})", at.u, at.v)]
    GnlBreach {
        at: State,
        partial: Box<crate::wave::RarefactionCurve>,
    },

    #[error("{0} is outside the traced range")]
    Range(f64),

    #[error("no admissible intermediate state inside the window")]
    NoSolutionInWindow(Box<crate::riemann::NoSolutionReport>),

    #[error("{} admissible intermediate states found", .0.len())]
    NonUniqueSolution(Vec<crate::riemann::IntersectionRecord>),

    #[error("waves are not ordered: max wave-1 speed {max1} >= min wave-2 speed {min2}")]
    SpeedOrdering { max1: f64, min2: f64 },

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("step size floor reached at s = {0}")]
    Stiffness(f64),

    #[error("constrained least-squares system is singular (pivot {0:e})")]
    Rank(f64),

    #[error("CFL condition violated: dt * max|lambda| / dx = {0}")]
    CflViolation(f64),

    #[error("cell {cell} left the model domain at t = {t}")]
    DomainExcursion { cell: usize, t: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid(_) | Error::Io(_))
    }
}
