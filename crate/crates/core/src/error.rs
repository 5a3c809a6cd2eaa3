use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // potential
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("position {x} is outside the potential's domain")]
    Domain { x: f64 },
    #[error("unknown builtin potential `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },

    // discretize
    #[error("no classical turning points for E = {energy}")]
    NoTurningPoints { energy: f64 },
    #[error("bracket [{lo}, {hi}] does not enclose the classically allowed region")]
    BracketTooNarrow { lo: f64, hi: f64 },
    #[error("potential never rises above E = {energy} towards {direction}")]
    UnboundedDirection { energy: f64, direction: &'static str },

    // tmatrix
    #[error("layer {layer} phase increment {increment} reaches pi/2; refine the layer width")]
    StepTooCoarse { layer: usize, increment: f64 },
    #[error("log-derivative pole sits exactly on layer edge {boundary}")]
    PoleAtBoundary { boundary: usize },

    // phaseflow
    #[error("step size underflow at x = {x} while integrating the phase flow")]
    ToleranceNotMet { x: f64 },
    #[error("turning-point singularity unresolved near x = {x}")]
    TurningPointSingularity { x: f64 },
    #[error("energy {energy} is not an eigenvalue (phase mismatch {mismatch})")]
    NotAnEigenvalue { energy: f64, mismatch: f64 },

    // quantize
    #[error("no bound state with n = {n} (action saturates at {j_max})")]
    NoSuchBoundState { n: usize, j_max: f64 },
    #[error("action is not increasing between E = {e_lo} and E = {e_hi}")]
    MonotonicityViolation { e_lo: f64, e_hi: f64 },

    // oracles
    #[error("oracle did not converge: {0}")]
    NonConvergence(String),
    #[error("no analytic spectrum for `{0}`")]
    NoCatalogEntry(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}
