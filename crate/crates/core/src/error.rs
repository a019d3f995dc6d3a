use std::fmt;

use thiserror::Error;

use crate::mathtext::LatexError;
use crate::model::OpId;
use crate::region::RegionId;
use crate::structure::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where in the input a parse failure happened.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PdfLocation {
    pub page: Option<u32>,
    pub offset: Option<usize>,
}

impl fmt::Display for PdfLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.page, self.offset) {
            (Some(p), Some(o)) => write!(f, " (page {p}, offset {o})"),
            (Some(p), None) => write!(f, " (page {p})"),
            (None, Some(o)) => write!(f, " (offset {o})"),
            (None, None) => Ok(()),
        }
    }
}

fn list_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed PDF{location}: {message}")]
    MalformedPdf { location: PdfLocation, message: String },

    #[error("invalid structure tree: {}", list_violations(.0))]
    InvalidTree(Vec<Violation>),

    #[error("structure tree references missing content operator {0}")]
    UnresolvedContent(OpId),

    #[error("invalid language tag `{0}`")]
    InvalidLanguageTag(String),

    #[error("metadata field `{0}` must not be empty")]
    MissingMeta(&'static str),

    #[error("unknown region {0}")]
    UnknownRegion(RegionId),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operator {0} is already owned by a region")]
    OpAlreadyTagged(OpId),

    #[error("unknown content operator {0}")]
    UnknownOp(OpId),

    #[error("{0} distinct heading styles exceed the six heading levels")]
    TooManyLevels(usize),

    #[error("table region {0} contains no content")]
    EmptyGrid(RegionId),

    #[error("list region {0} contains no content")]
    EmptyList(RegionId),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid list specification: {0}")]
    InvalidListSpec(String),

    #[error(transparent)]
    Latex(#[from] LatexError),

    #[error("ground truth does not match the document: {0}")]
    TruthMismatch(String),

    #[error("revision conflict: expected {expected}, current is {actual}")]
    RevisionConflict { expected: u64, actual: u64 },

    #[error("validation failed: {}", list_violations(.0))]
    ValidationFailed(Vec<Violation>),

    #[error("unknown session `{0}`")]
    UnknownSession(String),

    #[error("step {0} does not exist")]
    UnknownStep(u8),

    #[error("steps {steps:?} must be complete before export")]
    StepsIncomplete { steps: Vec<u8> },

    #[error("invalid request: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn malformed(message: impl Into<String>) -> Self {
        Error::MalformedPdf { location: PdfLocation::default(), message: message.into() }
    }

    pub(crate) fn malformed_at(page: Option<u32>, offset: Option<usize>, message: impl Into<String>) -> Self {
        Error::MalformedPdf { location: PdfLocation { page, offset }, message: message.into() }
    }

    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedPdf { .. } => "malformed_pdf",
            Error::InvalidTree(_) => "invalid_tree",
            Error::UnresolvedContent(_) => "unresolved_content",
            Error::InvalidLanguageTag(_) => "invalid_language_tag",
            Error::MissingMeta(_) => "missing_meta",
            Error::UnknownRegion(_) => "unknown_region",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::OpAlreadyTagged(_) => "op_already_tagged",
            Error::UnknownOp(_) => "unknown_op",
            Error::TooManyLevels(_) => "too_many_levels",
            Error::EmptyGrid(_) => "empty_grid",
            Error::EmptyList(_) => "empty_list",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidListSpec(_) => "invalid_list_spec",
            Error::Latex(_) => "latex",
            Error::TruthMismatch(_) => "truth_mismatch",
            Error::RevisionConflict { .. } => "revision_conflict",
            Error::ValidationFailed(_) => "validation_failed",
            Error::UnknownSession(_) => "unknown_session",
            Error::UnknownStep(_) => "unknown_step",
            Error::StepsIncomplete { .. } => "steps_incomplete",
            Error::InvalidInput(_) => "invalid_input",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Violations carried by validation-type errors.
    pub fn violations(&self) -> &[Violation] {
        match self {
            Error::InvalidTree(v) | Error::ValidationFailed(v) => v,
            _ => &[],
        }
    }
}
