use std::fmt;

use redispatch_core::Error as CoreError;
use redispatch_ingest::IngestError;

/// Exit classes of the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Failure {
    Config,
    Data,
    Runtime,
}

impl Failure {
    pub fn exit_code(self) -> i32 {
        match self {
            Failure::Config => 2,
            Failure::Data => 3,
            Failure::Runtime => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Failure::Config => "configuration error",
            Failure::Data => "data error",
            Failure::Runtime => "runtime error",
        })
    }
}

fn core_class(e: &CoreError) -> Failure {
    match e {
        CoreError::Io(_) => Failure::Runtime,
        _ => Failure::Data,
    }
}

/// Explicit tags win; otherwise library errors are sorted by kind.
pub fn classify(err: &anyhow::Error) -> Failure {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return *f;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<IngestError>() {
            return match e {
                IngestError::Core(c) => core_class(c),
                IngestError::Request(_) | IngestError::Auth { .. } => Failure::Config,
                IngestError::Schema(_)
                | IngestError::Xml { .. }
                | IngestError::Offline(_)
                | IngestError::MissingFixture(_)
                | IngestError::Csv(_)
                | IngestError::Json(_) => Failure::Data,
                _ => Failure::Runtime,
            };
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return core_class(e);
        }
    }
    Failure::Runtime
}

pub trait Tag<T> {
    fn tag(self, class: Failure) -> anyhow::Result<T>;
}

impl<T, E: Into<anyhow::Error>> Tag<T> for Result<T, E> {
    fn tag(self, class: Failure) -> anyhow::Result<T> {
        self.map_err(|e| e.into().context(class))
    }
}
