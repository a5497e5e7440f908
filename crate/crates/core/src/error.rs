use std::fmt;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where in an input file a problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub source: String,
    pub row: Option<u64>,
    pub column: Option<String>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source)?;
        if let Some(row) = self.row {
            write!(f, ": row {row}")?;
        }
        if let Some(column) = &self.column {
            write!(f, ", column `{column}`")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid or inconsistent configuration values.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input data (CSV rows, timestamps, duplicate ids).
    #[error("ingestion error in {location}: {message}")]
    Ingestion { location: Location, message: String },

    /// Index/time bounds outside the admissible span.
    #[error("range error: {0}")]
    Range(String),

    /// Inputs that are individually valid but do not line up.
    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("cannot read {}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Runtime(String),
}

impl Error {
    pub(crate) fn ingestion(
        source: impl Into<String>,
        row: Option<u64>,
        column: Option<&str>,
        message: impl Into<String>,
    ) -> Self {
        Error::Ingestion {
            location: Location {
                source: source.into(),
                row,
                column: column.map(str::to_owned),
            },
            message: message.into(),
        }
    }

    /// Process exit code: 2 for configuration/ingestion problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Ingestion { .. } | Error::Range(_) | Error::Input { .. } => 2,
            Error::Mismatch(_) | Error::Output { .. } | Error::Runtime(_) => 1,
        }
    }
}
