//! Protocol checks for a single annotation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ArgumentAnnotation, Span, Tweet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Mode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} {}: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tweet_id: String,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    /// No error-level issue. Warnings never fail a report.
    pub fn passes(&self) -> bool {
        self.error_count() == 0
    }

    pub fn error_count(&self) -> usize {
        self.issues.iter().filter(|i| i.severity == Severity::Error).count()
    }

    pub fn errors(&self) -> Vec<Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Error)
            .cloned()
            .collect()
    }
}

struct Collector {
    mode: Mode,
    issues: Vec<Issue>,
}

impl Collector {
    fn error(&mut self, code: &str, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
        });
    }

    /// Error in strict mode, warning in lenient mode.
    fn soft(&mut self, code: &str, message: impl Into<String>) {
        let severity = match self.mode {
            Mode::Strict => Severity::Error,
            Mode::Lenient => Severity::Warning,
        };
        self.issues.push(Issue {
            severity,
            code: code.to_string(),
            message: message.into(),
        });
    }

    fn bounds(&mut self, name: &str, span: &Span, len: usize) {
        if span.end() > len {
            self.error(
                "SPAN_OUT_OF_BOUNDS",
                format!("{name} ends at {} but the text has {len} characters", span.end()),
            );
        }
    }
}

pub fn validate(tweet: &Tweet, annotation: &ArgumentAnnotation, mode: Mode) -> ValidationReport {
    let mut c = Collector {
        mode,
        issues: Vec::new(),
    };
    let len = tweet.char_len();
    if len == 0 {
        c.error("EMPTY_TEXT", "tweet text is empty");
    }

    if annotation.argumentative {
        if annotation.justification.is_none() {
            c.error("MISSING_JUSTIFICATION", "argumentative tweet without a justification");
        }
        if annotation.conclusion.is_none() {
            c.error("MISSING_CONCLUSION", "argumentative tweet without a conclusion");
        }
    } else {
        let present = [
            ("justification", annotation.justification.is_some()),
            ("conclusion", annotation.conclusion.is_some()),
            ("collective", annotation.collective.is_some()),
            ("property", annotation.property.is_some()),
            ("pivot", annotation.pivot.is_some()),
        ];
        for (name, _) in present.iter().filter(|(_, p)| *p) {
            c.error(
                "COMPONENT_ON_NON_ARGUMENTATIVE",
                format!("non-argumentative tweet carries a {name}"),
            );
        }
    }

    if let Some(p) = &annotation.justification {
        c.bounds("justification", &p.span, len);
    }
    if let Some(p) = &annotation.conclusion {
        c.bounds("conclusion", &p.span, len);
    }
    if let Some(s) = &annotation.collective {
        c.bounds("collective", s, len);
    }
    if let Some(s) = &annotation.property {
        c.bounds("property", s, len);
    }

    if annotation.argumentative {
        match (&annotation.collective, &annotation.property) {
            (Some(_), None) => c.soft("COLLECTIVE_WITHOUT_PROPERTY", "collective annotated without a property"),
            (None, Some(_)) => c.soft("PROPERTY_WITHOUT_COLLECTIVE", "property annotated without a collective"),
            _ => {}
        }
    }

    if let Some(pivot) = &annotation.pivot {
        c.bounds("pivot justification side", &pivot.justification_side, len);
        c.bounds("pivot conclusion side", &pivot.conclusion_side, len);
        match (&annotation.justification, &annotation.conclusion) {
            (Some(j), Some(k)) => {
                if !j.span.covers(&pivot.justification_side) {
                    c.soft(
                        "PIVOT_OUTSIDE_JUSTIFICATION",
                        "pivot justification side reaches outside the justification",
                    );
                }
                if !k.span.covers(&pivot.conclusion_side) {
                    c.soft(
                        "PIVOT_OUTSIDE_CONCLUSION",
                        "pivot conclusion side reaches outside the conclusion",
                    );
                }
            }
            _ if annotation.argumentative => {
                c.error("PIVOT_WITHOUT_PREMISES", "pivot requires both a justification and a conclusion")
            }
            _ => {}
        }
    }

    ValidationReport {
        tweet_id: tweet.id.clone(),
        issues: c.issues,
    }
}
