use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("OAM index {m} lies outside the window [{m_min}, {m_max}]")]
    Window { m: i64, m_min: i64, m_max: i64 },

    #[error("amplitude {magnitude:.3e} reached OAM site {m} at the window edge (limit {limit:.1e})")]
    Truncation { m: i64, magnitude: f64, limit: f64 },

    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("bands are degenerate at k = {k} (eigenvalue gap {gap:.3e})")]
    DegenerateBand { k: f64, gap: f64 },

    #[error("eigenstate trajectory is not planar (max distance {distance:.3e} from the fitted great circle)")]
    NotPlanar { distance: f64 },

    #[error("quadrature did not converge: estimated error {error:.3e} after {intervals} intervals")]
    Quadrature { error: f64, intervals: usize },

    #[error("no counts enter the inequality term for outcome pair {pair}")]
    ZeroCount { pair: String },

    #[error("detection efficiency for OAM {m} must be positive, got {value}")]
    ZeroEfficiency { m: i64, value: f64 },

    #[error("hologram amplitude {value} at pixel ({x}, {y}) is outside [0, 1]")]
    AmplitudeRange { x: usize, y: usize, value: f64 },

    #[error("distribution has no probability mass")]
    EmptyDistribution,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }
}
