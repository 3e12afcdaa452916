//! Command-line front end for the `mtc-benjamin` solver.

pub mod config;
pub mod output;
pub mod snapshot;

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{parse_config, Experiment, RunConfig, WaveSpec};
pub use snapshot::{Snapshot, SnapshotError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Solver(#[from] mtc_benjamin::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: {source}", path.display())]
    Snapshot { path: PathBuf, source: SnapshotError },

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 for bad input, 1 for everything that went wrong while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } | Self::Solver(mtc_benjamin::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `path` via a temporary sibling and a rename, so readers never see
/// a partial file.
pub fn atomic_write(path: &Path, write: impl FnOnce(&mut io::BufWriter<&mut std::fs::File>) -> io::Result<()>) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    {
        let mut w = io::BufWriter::new(tmp.as_file_mut());
        write(&mut w).map_err(io_err(path))?;
        w.flush().map_err(io_err(path))?;
    }
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

pub fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_config(&text)
}
