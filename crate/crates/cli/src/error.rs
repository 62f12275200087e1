use blendcurv::GeomError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or expressions; exit status 2.
    #[error("usage: {0}")]
    Usage(String),
    /// A numerical failure while running; exit status 1.
    #[error("geometry: {0}")]
    Geometry(#[from] GeomError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Geometry(_) | CliError::Io(_) => 1,
        }
    }
}
