use thiserror::Error;

pub type Result<T> = std::result::Result<T, KineticsError>;

#[derive(Debug, Error)]
pub enum KineticsError {
    #[error("collision normal is not a unit vector (|n| = {norm})")]
    NonUnitNormal { norm: f64 },

    #[error("restitution coefficient {0} outside (0, 1]")]
    InvalidRestitution(f64),

    #[error("inverse collision is singular for restitution {0}")]
    SingularRestitution(f64),

    #[error("velocity grid under-resolves the distribution: {0}")]
    UnderResolved(String),

    #[error("speed {speed} is not below lambda = {lambda}")]
    SpeedExceedsLambda { speed: f64, lambda: f64 },

    #[error("point lies at the chart singularity (distance {distance:e} from the excluded pole)")]
    ChartSingularity { distance: f64 },

    #[error("DSMC majorant still exceeded after {retries} doublings")]
    MajorantExceeded { retries: u32 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl KineticsError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        KineticsError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Whether the failure is numerical (as opposed to invalid input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            KineticsError::MajorantExceeded { .. }
                | KineticsError::ChartSingularity { .. }
                | KineticsError::SingularRestitution(_)
        )
    }
}
