//! Error classification and atomic output.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// A checked property does not hold.
    Analysis,
    Usage,
    Budget,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Usage,
            message: message.into(),
        }
    }

    pub fn analysis(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Analysis,
            message: message.into(),
        }
    }

    pub fn budget(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Budget,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            Kind::Analysis => 1,
            Kind::Usage => 2,
            Kind::Budget => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<polargirth::Error> for CliError {
    fn from(e: polargirth::Error) -> Self {
        match e {
            polargirth::Error::BudgetExceeded { .. } => CliError::budget(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so `path` either keeps its old contents or gets all of the new.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::usage(format!("{}: {e}", path.display()));
    let mut tmp = NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Writes to `out` atomically, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::usage(format!("stdout: {e}")))
        }
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// `<path>.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}
