use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("site {site} out of range for {n_atoms} atoms")]
    SiteOutOfRange { site: usize, n_atoms: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator assembly needs {required} bytes but the memory budget is {budget} bytes")]
    MemoryBudget { required: u64, budget: u64 },

    #[error("Krylov step did not converge: residual {residual:.3e} above tolerance {tolerance:.3e}")]
    KrylovBreakdown { residual: f64, tolerance: f64 },

    #[error("state norm drifted by {drift:.3e} in one step")]
    NormDrift { drift: f64 },

    #[error("density-matrix trace drifted by {drift:.3e}")]
    TraceDrift { drift: f64 },

    #[error("mean spin vanishes (|<S>| = {0:.3e})")]
    VanishingSpin(f64),

    #[error("identity violated at m = {m}: residual {residual:.3e}")]
    IdentityViolation { m: f64, residual: f64 },

    #[error("sampling interval too coarse: per-site phase may advance {increment:.3} rad per sample (limit pi)")]
    SamplingTooCoarse { increment: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::KrylovBreakdown { .. }
                | Error::NormDrift { .. }
                | Error::TraceDrift { .. }
                | Error::VanishingSpin(_)
                | Error::IdentityViolation { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
