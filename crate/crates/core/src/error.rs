use std::path::PathBuf;

use thiserror::Error;

use crate::nqr::Gauge;
use crate::su2::Frame;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// `log_map` at the branch point U = -1, where the rotation axis is undefined.
    #[error("logarithm is degenerate at U = -1 (|v| = {angle})")]
    DegenerateLog { angle: f64 },

    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("direction theta = {theta} lies outside the {gauge:?} gauge chart")]
    OffChart { gauge: Gauge, theta: f64 },

    #[error("cannot combine vectors in frames {left:?} and {right:?}")]
    FrameMismatch { left: Frame, right: Frame },

    #[error("no real rotation between frames {source_frame:?} and {target:?}")]
    UnsupportedFrame { source_frame: Frame, target: Frame },

    #[error("gauge factor {factor} cannot be applied to a connection in the {gauge:?} gauge")]
    GaugePairing { factor: &'static str, gauge: Gauge },

    #[error("unitarity drift {drift:e} exceeds tolerance (too few integrator steps?)")]
    UnitarityDrift { drift: f64 },

    #[error("state norm drift {drift:e} exceeds tolerance")]
    NormDrift { drift: f64 },

    #[error("distribution parameters are degenerate: {0}")]
    DegenerateDistribution(&'static str),

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the input configuration rather than the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Json(_) | Error::Io { .. })
    }
}
