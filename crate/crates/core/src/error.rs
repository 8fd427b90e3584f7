use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("grid mismatch: dictionaries or coefficients refer to different direction grids")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("ill-conditioned SH sampling matrix for geometry '{label}' (condition number {cond:.3e})")]
    IllConditioned { label: String, cond: f64 },

    #[error("hermitian factorization failed after regularization retry")]
    Factorization,

    #[error("position ({x:.3}, {y:.3}, {z:.3}) lies outside the room")]
    OutsideRoom { x: f64, y: f64, z: f64 },

    #[error("signal of {got} samples is shorter than one frame ({need})")]
    TooShort { got: usize, need: usize },

    #[error("energy map mismatch undefined: both maps are all-zero")]
    EmptyMaps,

    #[error("config error: {0}")]
    Config(String),

    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
