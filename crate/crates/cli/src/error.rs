use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] deeplrr::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 usage, 3 I/O, 4 malformed input data, 5 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Stage { source, .. } => source.exit_code(),
            CliError::Core(e) => match e {
                deeplrr::Error::Io { .. } => EXIT_IO,
                deeplrr::Error::InvalidConfig(_)
                | deeplrr::Error::InvalidArgument(_)
                | deeplrr::Error::LayerOutOfRange { .. } => EXIT_USAGE,
                e if e.is_numeric() => EXIT_NUMERIC,
                _ => EXIT_PARSE,
            },
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        CliError::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
