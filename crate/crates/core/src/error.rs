use thiserror::Error;

/// Errors raised by the trajectory engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Geometry that leaves the camouflage constraint line undefined, e.g. the
    /// target sitting on the static point.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("shadower is off the constraint line: deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    NotCollinear { deviation: f64, tolerance: f64 },

    /// k > 1 places the shadower beyond the target on the constraint line.
    #[error("camouflage ratio k = {k} exceeds 1 at t = {t}")]
    RatioOutOfDomain { k: f64, t: f64 },

    #[error("t = {t} is outside the evaluation horizon [{start}, {end}]")]
    OutsideHorizon { t: f64, start: f64, end: f64 },

    #[error("reactive targets cannot be evaluated standalone; integrate them with the guidance simulator")]
    ReactiveTarget,

    #[error("singularity at t = {t}: {what}")]
    Singularity { t: f64, what: String },

    #[error("no capture: {0}")]
    NoCapture(String),

    #[error("camouflage lost at step {step} (t = {t}): relative deviation {deviation:.3e}")]
    LostCamouflage { step: usize, t: f64, deviation: f64 },

    #[error("guidance command is not finite at t = {t}")]
    GainOverflow { t: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
