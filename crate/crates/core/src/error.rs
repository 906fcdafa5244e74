use std::fmt;

use crate::validate::Issue;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid fragment {start}..{end}: start must be smaller than end")]
    InvalidFragment { start: usize, end: usize },

    #[error("a span needs at least one fragment")]
    EmptySpan,

    #[error("fragments {first:?} and {second:?} overlap")]
    OverlappingFragments {
        first: (usize, usize),
        second: (usize, usize),
    },

    #[error("range {start}..{end} is outside a text of {len} characters")]
    OutOfBounds { start: usize, end: usize, len: usize },

    #[error("tweet text must not be empty")]
    EmptyText,

    #[error("duplicate tweet id `{0}`")]
    DuplicateTweet(String),

    #[error("layer `{layer}` references unknown tweet `{tweet}`")]
    UnknownTweet { layer: String, tweet: String },

    #[error("unknown annotation layer `{0}`")]
    UnknownLayer(String),

    #[error("line {line}: {kind}")]
    Standoff { line: usize, kind: StandoffIssue },

    #[error("annotation for tweet `{tweet}` is invalid: {}", join_issues(.issues))]
    InvalidAnnotation { tweet: String, issues: Vec<Issue> },

    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("label `{0}` is not part of the label domain")]
    UnknownLabel(String),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("`{0}` is not a sanctioned joint pair (Collective/Property or Justification/Conclusion)")]
    InvalidJointPair(String),

    #[error("hashtag body must not be empty")]
    EmptyHashtag,

    #[error("invalid train fraction {0} (expected 0.25, 0.5, 0.75 or 1.0)")]
    InvalidFraction(f64),

    #[error("manifest is already subsampled to fraction {0}")]
    AlreadySubsampled(f64),

    #[error("not enough {language} tweets: need {needed}, have {available}")]
    InsufficientTweets {
        language: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("no annotation for tweet `{0}` in the selected layer")]
    MissingAnnotation(String),

    #[error("prediction coverage mismatch: {0}")]
    Coverage(String),

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| format!("{} ({})", i.code, i.message))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Problems found while reading a standoff `.ann` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StandoffIssue {
    MalformedLine(String),
    MalformedOffsets(String),
    UnknownLabel(String),
    CoveredTextMismatch { expected: String, found: String },
    DuplicateEntry(String),
    UnknownTarget(String),
    InvalidType(String),
    MissingType(String),
    MissingMarker,
    ConflictingMarkers,
}

impl StandoffIssue {
    pub fn code(&self) -> &'static str {
        match self {
            StandoffIssue::MalformedLine(_) => "MALFORMED_LINE",
            StandoffIssue::MalformedOffsets(_) => "MALFORMED_OFFSETS",
            StandoffIssue::UnknownLabel(_) => "UNKNOWN_LABEL",
            StandoffIssue::CoveredTextMismatch { .. } => "COVERED_TEXT_MISMATCH",
            StandoffIssue::DuplicateEntry(_) => "DUPLICATE_ENTRY",
            StandoffIssue::UnknownTarget(_) => "UNKNOWN_TARGET",
            StandoffIssue::InvalidType(_) => "INVALID_TYPE",
            StandoffIssue::MissingType(_) => "MISSING_TYPE",
            StandoffIssue::MissingMarker => "MISSING_MARKER",
            StandoffIssue::ConflictingMarkers => "CONFLICTING_MARKERS",
        }
    }
}

impl fmt::Display for StandoffIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.code())?;
        match self {
            StandoffIssue::MalformedLine(s) => write!(f, "cannot parse `{s}`"),
            StandoffIssue::MalformedOffsets(s) => write!(f, "bad offsets `{s}`"),
            StandoffIssue::UnknownLabel(s) => write!(f, "unknown label `{s}`"),
            StandoffIssue::CoveredTextMismatch { expected, found } => {
                write!(f, "offsets cover `{expected}` but entry says `{found}`")
            }
            StandoffIssue::DuplicateEntry(s) => write!(f, "more than one `{s}` entry"),
            StandoffIssue::UnknownTarget(s) => write!(f, "attribute targets unknown entry `{s}`"),
            StandoffIssue::InvalidType(s) => write!(f, "`{s}` is not fact, value or policy"),
            StandoffIssue::MissingType(s) => write!(f, "premise `{s}` has no proposition type"),
            StandoffIssue::MissingMarker => {
                write!(f, "no Argumentative or NonArgumentative entry")
            }
            StandoffIssue::ConflictingMarkers => {
                write!(f, "both Argumentative and NonArgumentative entries present")
            }
        }
    }
}
