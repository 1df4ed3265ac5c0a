use std::path::{Path, PathBuf};

/// Errors of the command-line layer. Every file-related variant carries the
/// path it concerns.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: hit_core::Error,
    },
    #[error(transparent)]
    Core(#[from] hit_core::Error),
    #[error("benchmark error: {0}")]
    Bench(String),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn file(path: &Path, source: hit_core::Error) -> Self {
        Error::File {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for bad input (files, flags, data, configuration), 2 for internal
    /// invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Bench(_) | Error::Usage(_) => 1,
            Error::File { source, .. } | Error::Core(source) => {
                if source.is_user_error() {
                    1
                } else {
                    2
                }
            }
        }
    }
}

/// Attaches a path to core errors.
pub(crate) trait WithPath<T> {
    fn at(self, path: &Path) -> Result<T>;
}

impl<T> WithPath<T> for hit_core::Result<T> {
    fn at(self, path: &Path) -> Result<T> {
        self.map_err(|e| Error::file(path, e))
    }
}

impl<T> WithPath<T> for std::io::Result<T> {
    fn at(self, path: &Path) -> Result<T> {
        self.map_err(|e| Error::io(path, e))
    }
}
