//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("root scan grid too coarse: grid_n = {grid_n} but degree {degree} needs at least {required}")]
    DegreeTooHigh {
        grid_n: usize,
        degree: usize,
        required: usize,
    },

    #[error("grid needs at least 2 points")]
    EmptyGrid,

    #[error("coupling has zeros on the circle; use the vanishing-noise solver")]
    NotNonVanishing,

    #[error("periodicity/normalization system is ill-conditioned (cond = {cond:.3e}); coupling is nearly degenerate")]
    IllConditioned { cond: f64 },

    #[error("zero at phi = {phi:.12} is not transversal (|f'| = {slope:.3e}); singular expansion invalid")]
    NonTransversalZero { phi: f64, slope: f64 },

    #[error("interval [{lo:.6}, {hi:.6}]: solution misses the boundary series by {mismatch:.3e} relative (tol {tol:.1e}); raise n or tighten the stepper tolerance")]
    BoundaryMismatch {
        lo: f64,
        hi: f64,
        mismatch: f64,
        tol: f64,
    },

    #[error("invalid simulation times: {0}")]
    InvalidTimes(String),

    #[error("density residual {residual:.3e} exceeds threshold {threshold:.3e}; re-solve before estimating")]
    StaleDensity { residual: f64, threshold: f64 },

    #[error("flux-form estimator is unavailable when the coupling vanishes on the circle")]
    VanishingNoise,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("separation never entered the decay window before the horizon")]
    NoDecayWindow,

    #[error("invalid horizon: {0}")]
    InvalidHorizon(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("depth {depth} exceeds the increment buffer ({buffer} steps)")]
    DepthExceedsBuffer { depth: f64, buffer: u64 },

    #[error("stepper stalled at phi = {at:.9} (step below {min_step:.3e}); problem too stiff for the requested tolerance")]
    StepperStalled { at: f64, min_step: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
