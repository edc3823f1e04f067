use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    /// A configuration value violates one of its constraints.
    #[error("invalid config field `{field}`: {constraint}")]
    Config { field: String, constraint: String },

    #[error("could not parse config: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed results file: {0}")]
    Results(String),

    #[error("drop {drop}: {source}")]
    Drop {
        drop: u64,
        #[source]
        source: Box<SimError>,
    },
}

impl SimError {
    pub fn config(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        SimError::Config {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}
