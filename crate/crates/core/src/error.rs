use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: String, reason: String },

    #[error("thermal occupation requires omega > 0, got {0}")]
    NonPositiveFrequency(f64),

    #[error("mean-field solve did not converge after {iterations} iterations (residual {residual:e}, last x_s = {last_x:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        last_x: f64,
    },

    #[error("frequency collapse: effective LC frequency {omega_lc_eff:e} rad/s at x_s = {x:e}")]
    FrequencyCollapse { omega_lc_eff: f64, x: f64 },

    #[error("drift matrix is not Hurwitz: eigenvalue {re:e}{im:+e}i has non-negative real part")]
    Unstable { re: f64, im: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("integration blew up at t = {t:e}; try a smaller step than dt = {dt:e}")]
    StepInstability { t: f64, dt: f64 },

    #[error("unphysical covariance: {0}")]
    Unphysical(String),

    #[error("bipartition needs two distinct subsystems, got {0} twice")]
    SameSubsystem(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("{0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Physics-level failures (instability, non-convergence) as opposed to
    /// usage or configuration mistakes.
    pub fn is_physical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::FrequencyCollapse { .. }
                | Error::Unstable { .. }
                | Error::StepInstability { .. }
                | Error::Unphysical(_)
        )
    }
}
