use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A CSV row failed validation; `row` is 1-based and counts the header.
    #[error("{path}: row {row}: {message}")]
    CsvRow {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    CsvFile { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error(
        "no convergence after {iterations} Newton iterations at load step {step} \
         (H = {load} kN); residual history tail: {history:?}"
    )]
    NoConvergence {
        iterations: usize,
        step: usize,
        load: f64,
        history: Vec<f64>,
    },

    /// Wraps a failure with the pipeline stage it occurred in.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
