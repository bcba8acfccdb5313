use std::fmt;

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io { path: String, message: String },
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io { path, message } => write!(f, "{path}: {message}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<xent_core::Error> for CliError {
    fn from(e: xent_core::Error) -> Self {
        use xent_core::Error as E;
        match e {
            E::Io { path, message } => CliError::Io { path, message },
            E::OutOfRange { .. }
            | E::InvalidParameter { .. }
            | E::Parse { .. }
            | E::UnknownForm(_)
            | E::MissingKey { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
