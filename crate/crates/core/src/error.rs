use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the basin-computation pipeline.
///
/// Variants are grouped so a caller (notably the CLI) can map them onto
/// coarse failure classes: configuration, I/O, numerical divergence and
/// atlas mismatches.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A trajectory left the representable range (non-finite state or a
    /// collapsed adaptive step).
    #[error("trajectory diverged at t = {t}")]
    Divergence { t: f64 },

    /// Run parameters disagree with the parameters baked into an atlas.
    #[error("atlas mismatch: {0}")]
    AtlasMismatch(String),

    #[error("atlas file corrupt: checksum mismatch")]
    ChecksumMismatch,

    #[error("atlas file version {found} not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("atlas file truncated or malformed: {0}")]
    Truncated(String),

    /// A phase-space point whose velocity lies outside the mesh's padded
    /// range; the caller decides whether this is fatal.
    #[error("point outside mesh: theta_dot = {theta_dot}")]
    OutOfMesh { theta_dot: f64 },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
