use thiserror::Error;

use crate::sql::Violation;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("invalid schema JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read schema: {0}")]
    Io(#[from] std::io::Error),
    #[error("`{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("duplicate table `{0}`")]
    DuplicateTable(String),
    #[error("duplicate column `{column}` in table `{table}`")]
    DuplicateColumn { table: String, column: String },
    #[error("key `{0}` does not name an existing table.column")]
    UnknownKey(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("resolution error: {0}")]
    Resolution(String),
}

impl ParseError {
    pub(crate) fn syntax(position: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EditError {
    #[error("queries resolve against different schemas (`{0}` vs `{1}`)")]
    SchemaMismatch(String, String),
    #[error("inapplicable edit: {0}")]
    InapplicableEdit(String),
    #[error("edit yields an invalid query: {}", fmt_violations(.0))]
    InvalidResult(Vec<Violation>),
    #[error("malformed linearized edit: {0}")]
    MalformedLinearization(String),
}

fn fmt_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("seed {index} ({db_id}) does not validate: {reason}")]
    SeedValidation {
        index: usize,
        db_id: String,
        reason: String,
    },
    #[error("editor `{0}` is not feasible for this query")]
    InfeasibleEditor(String),
    #[error("unknown editor `{0}`")]
    UnknownEditor(String),
    #[error("invalid synthesis config: {0}")]
    Config(String),
    #[error("editor `{editor}` produced an invalid query: {}", fmt_violations(.violations))]
    EditorBug { editor: String, violations: Vec<Violation> },
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error("example {index}: unknown database `{db_id}`")]
    UnknownDatabase { index: usize, db_id: String },
    #[error("example {index}: {what} does not parse: {source}")]
    BadExample {
        index: usize,
        what: &'static str,
        source: ParseError,
    },
}
