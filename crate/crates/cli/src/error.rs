use std::path::Path;

use physcue::caption::CaptionError;
use physcue::dataset::DatasetError;
use physcue::fsdva::FsdvaError;

#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Fsdva(#[from] FsdvaError),
    #[error(transparent)]
    Caption(#[from] CaptionError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: line {line}: {message}")]
    Input { path: String, line: usize, message: String },
    #[error("no caption path has a feature row ({captions} captions, {rows} rows)")]
    NoOverlap { captions: usize, rows: usize },
    #[error("dataset `{dataset}` has {got} {label} samples, need at least 2")]
    TooFewSamples { dataset: String, label: &'static str, got: usize },
}

impl CliError {
    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io { path: path.display().to_string(), source }
    }
}
