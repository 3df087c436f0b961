//! Crate-wide error type.
//!
//! Every variant maps to a stable short code (`E_SCHEMA`, `E_CYCLE`, ...)
//! which the CLI prints in its structured diagnostics.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("line {line}: duplicate utterance id `{id}`")]
    DuplicateId { id: String, line: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("graph has a cycle through `{0}`")]
    Cycle(String),

    #[error("edge references undeclared node `{0}`")]
    UnknownNode(String),

    #[error("self-loop on node `{0}`")]
    SelfLoop(String),

    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),

    #[error("duplicate node `{0}`")]
    DuplicateNode(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("utterance `{0}` has an empty reference")]
    EmptyRef(String),

    #[error("utterance `{id}` has no hypothesis for model `{model}`")]
    MissingModel { id: String, model: String },

    #[error("too few values: need at least {needed}, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("zero posterior mass for phone `{phone}` at frame {frame}")]
    ZeroPosterior { phone: String, frame: usize },

    #[error("segment {index}: {source}")]
    Segment {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no posterior frame for t = {0}")]
    MissingFrame(usize),

    #[error("phone `{0}` is not in the phone inventory")]
    UnknownPhone(String),

    #[error("invalid phone segment: {0}")]
    InvalidSegment(String),

    #[error("audio too short: {got_ms:.1} ms < {needed_ms} ms")]
    TooShort { got_ms: f64, needed_ms: u32 },

    #[error("audio is silent")]
    Silent,

    #[error("variable `{0}` is missing")]
    MissingVariable(String),

    #[error("assignment does not cover node `{0}`")]
    IncompleteAssignment(String),

    #[error("distribution is not normalized (sum = {0})")]
    NotNormalized(f64),

    #[error("unknown level `{level}` for variable `{variable}`")]
    UnknownLevel { variable: String, level: String },

    #[error("empty stratum: {0}")]
    EmptyStratum(String),

    #[error("invalid model definition: {0}")]
    InvalidSpec(String),

    #[error("joint state space of {0} configurations exceeds the enumeration limit")]
    StateExplosion(u128),

    #[error("record `{id}`: {source}")]
    Record {
        id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Schema { .. } => "E_SCHEMA",
            Error::DuplicateId { .. } => "E_DUPLICATE_ID",
            Error::Empty(_) => "E_EMPTY",
            Error::Cycle(_) => "E_CYCLE",
            Error::UnknownNode(_) => "E_UNKNOWN_NODE",
            Error::SelfLoop(_) => "E_SELF_LOOP",
            Error::DuplicateEdge(..) => "E_DUPLICATE_EDGE",
            Error::DuplicateNode(_) => "E_DUPLICATE_NODE",
            Error::Io { .. } => "E_IO",
            Error::EmptyRef(_) => "E_EMPTY_REF",
            Error::MissingModel { .. } => "E_MISSING_MODEL",
            Error::TooFew { .. } => "E_TOO_FEW",
            Error::ZeroPosterior { .. } => "E_ZERO_POSTERIOR",
            Error::Segment { source, .. } => source.code(),
            Error::MissingFrame(_) => "E_MISSING_FRAME",
            Error::UnknownPhone(_) => "E_UNKNOWN_PHONE",
            Error::InvalidSegment(_) => "E_INVALID_SEGMENT",
            Error::TooShort { .. } => "E_TOO_SHORT",
            Error::Silent => "E_SILENT",
            Error::MissingVariable(_) => "E_MISSING_VARIABLE",
            Error::IncompleteAssignment(_) => "E_INCOMPLETE_ASSIGNMENT",
            Error::NotNormalized(_) => "E_NOT_NORMALIZED",
            Error::UnknownLevel { .. } => "E_UNKNOWN_LEVEL",
            Error::EmptyStratum(_) => "E_EMPTY_STRATUM",
            Error::InvalidSpec(_) => "E_INVALID_SPEC",
            Error::StateExplosion(_) => "E_STATE_EXPLOSION",
            Error::Record { source, .. } => source.code(),
        }
    }

    /// Utterance or record id attached to this error, if any.
    pub fn record_id(&self) -> Option<&str> {
        match self {
            Error::DuplicateId { id, .. }
            | Error::EmptyRef(id)
            | Error::MissingModel { id, .. }
            | Error::Record { id, .. } => Some(id),
            _ => None,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn io_path(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::io(PathBuf::from(path).display().to_string(), source)
    }

    pub(crate) fn schema(line: usize, message: impl Into<String>) -> Self {
        Error::Schema {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_record(self, id: &str) -> Self {
        match self {
            e @ Error::Record { .. } => e,
            e => Error::Record {
                id: id.to_string(),
                source: Box::new(e),
            },
        }
    }
}
