use std::path::{Path, PathBuf};

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {}: {message}", config_name(section, key))]
    Config {
        section: String,
        key: String,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ionjump_core::Error),
    #[error("fit did not converge: {0}")]
    NonConvergence(String),
}

fn config_name(section: &str, key: &str) -> String {
    if key.is_empty() {
        format!("[{section}]")
    } else {
        format!("{section}.{key}")
    }
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn config(section: impl Into<String>, key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            section: section.into(),
            key: key.into(),
            message: message.into(),
        }
    }

    /// 1 for I/O, 2 for validation and usage, 3 for a non-converged fit.
    pub fn exit_code(&self) -> i32 {
        use ionjump_core::Error as E;
        match self {
            CliError::Io { .. } | CliError::Core(E::Io(_)) => 1,
            CliError::NonConvergence(_) => 3,
            _ => 2,
        }
    }
}
