use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", config_message(path, *line, message))]
    Config {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] unmeasure::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

fn config_message(path: &std::path::Path, line: Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config error at {}:{l}: {message}", path.display()),
        None => format!("config error in {}: {message}", path.display()),
    }
}

impl CliError {
    /// 2 for configuration errors, 3 when a reconstruction did not converge.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(unmeasure::Error::NotConverged(_)) => 3,
            _ => 1,
        }
    }
}
