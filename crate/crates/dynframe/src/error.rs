use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] dynframe_core::Error),
    #[error("problem file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("SDPA line {line}: {message}")]
    Sdpa { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("design rejected: {0}")]
    Design(String),
}

impl AppError {
    /// Process exit code: 2 for bad input, 3 for a rejected design, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::NotFound(_) | AppError::Schema { .. } | AppError::Sdpa { .. } | AppError::Usage(_) => 2,
            AppError::Design(_) => 3,
            AppError::Core(
                dynframe_core::Error::Superresonant { .. }
                | dynframe_core::Error::RangeViolation(_)
                | dynframe_core::Error::InfeasibleDesign(_),
            ) => 3,
            AppError::Core(
                dynframe_core::Error::InvalidProblem(_)
                | dynframe_core::Error::PhaseNotNormalized(_)
                | dynframe_core::Error::NonPositiveLength { .. }
                | dynframe_core::Error::Unsupported
                | dynframe_core::Error::ZeroFrequency,
            ) => 2,
            _ => 1,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;

pub(crate) fn read_file(path: &std::path::Path) -> AppResult<String> {
    std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            AppError::NotFound(path.to_path_buf())
        } else {
            AppError::Io { path: path.to_path_buf(), source }
        }
    })
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> AppResult<()> {
    std::fs::write(path, contents).map_err(|source| AppError::Io { path: path.to_path_buf(), source })
}
