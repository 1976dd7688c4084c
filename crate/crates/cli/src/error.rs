use thiserror::Error;

/// Everything that stops a run before a verdict is reached. All of these map
/// to exit code 2; physics failures are verdicts, not errors.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error in entry {stanza} ({kind}), field `{field}`: {message}")]
    Schema {
        stanza: usize,
        kind: String,
        field: String,
        message: String,
    },

    #[error("unknown sweep kind `{0}` (expected nosignal, gleason, boxes or search)")]
    UnknownKind(String),

    #[error("unknown fixture `{0}`; run `nosig fixture list`")]
    UnknownFixture(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("entry {stanza}: {source}")]
    Core {
        stanza: usize,
        #[source]
        source: nosig_core::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        2
    }
}
