use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Core(#[from] redispatch_core::Error),

    #[error("invalid request: {0}")]
    Request(String),

    #[error("authentication failed ({status}): {message}")]
    Auth { status: u16, message: String },

    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },

    #[error("http {status}: {message}")]
    Http { status: u16, message: String },

    #[error("transport: {0}")]
    Transport(String),

    #[error("malformed xml at byte {offset}: {message}")]
    Xml { offset: u64, message: String },

    #[error("schema: {0}")]
    Schema(String),

    #[error("offline: {0}")]
    Offline(String),

    #[error("missing fixture {0}")]
    MissingFixture(std::path::PathBuf),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;
