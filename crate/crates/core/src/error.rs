//! Error type shared by every stage of the pipeline.

use thiserror::Error;

/// Why shooting on the shock position failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShockSearchFailure {
    /// The boundary residual has no sign change on (l, L).
    NoSignChange,
    /// The residual is flat in the shock position (constant-area nozzle):
    /// the position is not determined by the outflow condition.
    NonUnique,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive density: rho = {0}")]
    NonPositiveDensity(f64),

    #[error("position {x} outside domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("steady ODE reached the sonic line near x = {x} (c^2 - u^2 = {gap:e})")]
    SonicSingularity { x: f64, gap: f64 },

    #[error("no subsonic Rankine-Hugoniot root for rho_minus = {rho_minus}")]
    NoSubsonicRoot { rho_minus: f64 },

    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    #[error("no admissible shock position: {reason:?}")]
    NoShockPosition { reason: ShockSearchFailure },

    #[error("vacuum formed at t = {t}, x = {x} (rho = {rho:e})")]
    VacuumFormed { t: f64, x: f64, rho: f64 },

    #[error("flow regime violated at boundary: {0}")]
    RegimeViolation(String),

    #[error("no Rankine-Hugoniot consistent state at perturbed shock x = {x}")]
    RhRepairFailed { x: f64 },

    #[error("shock lost: no admissible density crossing in the state")]
    ShockLost,

    #[error("multiple shocks detected ({count} crossings)")]
    MultipleShocks { count: usize },

    #[error("explicit step dt = {dt:e} exceeds stability limit {limit:e}")]
    StabilityViolation { dt: f64, limit: f64 },

    #[error("non-finite value produced at t = {t}")]
    NonFinite { t: f64 },

    #[error("eigenvalue iteration did not converge after {iters} iterations")]
    NoConvergence { iters: usize },

    #[error("fit window is empty: {0}")]
    FitWindowEmpty(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Label an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
