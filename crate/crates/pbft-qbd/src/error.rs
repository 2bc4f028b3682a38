use thiserror::Error;

/// Errors produced by the model, solver, oracle, simulator and sweep layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A model or solver parameter failed validation. `name` identifies the
    /// offending parameter so callers can tell the failures apart.
    #[error("invalid parameter `{name}`: {reason} (got {value})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The instance violates the stability condition rho < 1.
    #[error("unstable instance: rho = {rho} >= 1; the stationary distribution does not exist")]
    Unstable { rho: f64 },

    /// The rate-matrix iteration did not meet the tolerance within the
    /// iteration budget.
    #[error("rate-matrix iteration hit the limit of {max_iter} iterations (last step norm {last_step:.3e}, residual {residual:.3e})")]
    IterationLimit {
        max_iter: usize,
        last_step: f64,
        residual: f64,
    },

    /// The boundary linear system was singular or produced an implausible
    /// solution.
    #[error("boundary solve failed: {diagnostic}")]
    BoundarySolve { diagnostic: String },

    /// (I - R) could not be inverted; the solution sits at or beyond the
    /// stability boundary.
    #[error("I - R is numerically singular (max row sum of R = {spectral_radius_bound}); instance is at or beyond the stability boundary")]
    IminusRSingular { spectral_radius_bound: f64 },

    /// A direct linear solve failed.
    #[error("linear solve failed: {0}")]
    SingularSystem(String),

    /// The truncated chain kept too much mass at the last level.
    #[error("truncation level {level_cap} too small: tail mass {tail_mass:.3e} exceeds threshold {threshold:.3e}; increase the level cap")]
    TruncationTooSmall {
        level_cap: usize,
        tail_mass: f64,
        threshold: f64,
    },

    /// Simulation configuration failed validation.
    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    /// Sweep configuration failed validation.
    #[error("invalid sweep config: {0}")]
    InvalidSweepConfig(String),
}

impl Error {
    /// Short machine-readable code used in sweep rows and CSV output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "INVALID_PARAM",
            Error::Unstable { .. } => "UNSTABLE",
            Error::IterationLimit { .. } => "ITER_LIMIT",
            Error::BoundarySolve { .. } => "BOUNDARY_SOLVE",
            Error::IminusRSingular { .. } => "SINGULAR",
            Error::SingularSystem(_) => "SINGULAR",
            Error::TruncationTooSmall { .. } => "TRUNCATION_TOO_SMALL",
            Error::InvalidSimConfig(_) => "SIM_CONFIG",
            Error::InvalidSweepConfig(_) => "SWEEP_CONFIG",
        }
    }

    /// True for failures of the numerical machinery itself, as opposed to
    /// rejected inputs (validation, instability).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IterationLimit { .. }
                | Error::BoundarySolve { .. }
                | Error::IminusRSingular { .. }
                | Error::SingularSystem(_)
                | Error::TruncationTooSmall { .. }
        )
    }
}
