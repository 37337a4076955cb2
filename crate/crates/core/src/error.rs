use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid source statistics: {0}")]
    InvalidStatistics(String),

    #[error("invalid direction grid: {0}")]
    InvalidGrid(String),

    #[error("detector at theta = {theta} rad is {snap} rad from the nearest bin, more than half a bin width ({half_width} rad)")]
    GridTooCoarse {
        theta: f64,
        snap: f64,
        half_width: f64,
    },

    #[error("ensembles overlap on source {0}")]
    OverlappingSources(u8),

    #[error("correlator has imaginary residue {imag:e} (real part {real:e})")]
    NonHermitian { real: f64, imag: f64 },

    #[error("coincident particle positions")]
    CoincidentPositions,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration did not converge within t_max = {t_max:e} s (last z = {z:e} m, v = {v:e} m/s after {steps} steps)")]
    NonConvergence {
        t_max: f64,
        z: f64,
        v: f64,
        steps: u64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
