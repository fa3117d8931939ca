use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("numeric error: {0}")]
    Numeric(cellfade::Error),
}

impl CliError {
    /// 2 for bad input or unwritable output, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<cellfade::Error> for CliError {
    fn from(e: cellfade::Error) -> Self {
        match e {
            cellfade::Error::Domain(_) | cellfade::Error::WindowTooSmall(_) => {
                CliError::Config(e.to_string())
            }
            cellfade::Error::Io(msg) => CliError::Io(msg),
            other => CliError::Numeric(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
