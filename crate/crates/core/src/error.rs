use std::path::PathBuf;

use thiserror::Error;

use crate::flow::Evolution;

/// Errors raised by the geometry, flow and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Two consecutive nodes closer than the degeneracy threshold.
    #[error("degenerate curve: node spacing {spacing:e} at node {node} is below {threshold:e}")]
    DegenerateCurve {
        node: usize,
        spacing: f64,
        threshold: f64,
    },

    /// A node sits (numerically) at the origin, where the equivariant surface is singular.
    #[error("origin contact at node {node}: |x| = {distance:e}")]
    OriginContact { node: usize, distance: f64 },

    /// The Maslov integral vanishes, so no monotonicity constant exists.
    #[error("curve is not in the monotone class: Maslov integral is zero")]
    NonMonotone,

    #[error("configuration error: {0}")]
    Configuration(String),

    /// Argument outside the domain of a formula (e.g. evaluation time past the reference time).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("time step {dt:e} fell below the minimum {dt_min:e}")]
    StepUnderflow { dt: f64, dt_min: f64 },

    #[error("non-finite values at t = {t}")]
    NonFinite { t: f64 },

    /// Non-finite values appeared during integration; carries everything computed up to the
    /// last good state.
    #[error("integration failure at t = {t}: {detail}")]
    Integration {
        t: f64,
        detail: String,
        partial: Box<Evolution>,
    },

    /// A requested time lies outside the recorded trajectory.
    #[error("range error: {0}")]
    Range(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
