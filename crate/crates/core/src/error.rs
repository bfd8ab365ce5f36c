use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("image {index} is {actual_width}x{actual_height}, expected {width}x{height}")]
    DimensionMismatch {
        index: usize,
        width: usize,
        height: usize,
        actual_width: usize,
        actual_height: usize,
    },

    #[error("image source `{0}` is empty")]
    EmptySource(&'static str),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no manifest.json in {}", .0.display())]
    MissingManifest(PathBuf),

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("entry {index}: content hash {actual:016x} does not match manifest {expected:016x}")]
    HashMismatch {
        index: usize,
        expected: u64,
        actual: u64,
    },

    #[error("entry {index}: {message}")]
    Manifest { index: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
