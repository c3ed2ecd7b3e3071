use std::path::PathBuf;

use slabsel::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> CliError {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 usage or validation, 3 I/O or unreadable input, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e {
                CoreError::QuadratureOrder(_)
                | CoreError::InvalidProblem(_)
                | CoreError::Hyperparameter(_)
                | CoreError::Stratification { .. }
                | CoreError::WrongModel(_) => 2,
                CoreError::Io(_)
                | CoreError::Csv(_)
                | CoreError::Json(_)
                | CoreError::Parse { .. }
                | CoreError::ModelFormat(_)
                | CoreError::Unlabeled { .. } => 3,
                _ => 4,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
