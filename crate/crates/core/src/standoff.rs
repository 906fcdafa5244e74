//! Standoff (`.txt` + `.ann`) codec in the brat text-bound format.
//!
//! Components are text-bound entries (`T<n>\t<Label> <start> <end>[;<start> <end>...]\t<covered>`),
//! proposition types are attribute lines (`A<n>\tType T<k> Fact`). The
//! argumentativeness of the tweet is a whole-text `Argumentative` or
//! `NonArgumentative` entry.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result, StandoffIssue};
use crate::model::{char_slice, ArgumentAnnotation, Language, Pivot, Premise, PropositionType, Span, Tweet};
use crate::validate::{validate, Mode};

pub const LABELS: [&str; 8] = [
    "Argumentative",
    "NonArgumentative",
    "Justification",
    "Conclusion",
    "Collective",
    "Property",
    "PivotJ",
    "PivotC",
];

const TYPE_ATTRIBUTE: &str = "Type";

/// One text-bound line of an `.ann` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandoffEntry {
    pub entry_id: String,
    pub label: String,
    pub fragments: Vec<(usize, usize)>,
    pub covered_text: String,
}

impl StandoffEntry {
    fn render(&self) -> String {
        let offsets = self
            .fragments
            .iter()
            .map(|(s, e)| format!("{s} {e}"))
            .collect::<Vec<_>>()
            .join(";");
        format!("{}\t{} {}\t{}", self.entry_id, self.label, offsets, self.covered_text)
    }
}

/// Covered text as written to an `.ann` line: fragment slices joined by a
/// space, with line breaks and tabs flattened so the line stays intact.
pub fn covered_text(text: &str, fragments: &[(usize, usize)]) -> String {
    fragments
        .iter()
        .map(|&(s, e)| char_slice(text, s, e))
        .collect::<Vec<_>>()
        .join(" ")
        .chars()
        .map(|c| if matches!(c, '\n' | '\r' | '\t') { ' ' } else { c })
        .collect()
}

fn fail(line: usize, kind: StandoffIssue) -> Error {
    Error::Standoff { line, kind }
}

fn parse_offsets(raw: &str, line: usize, text_len: usize) -> Result<Vec<(usize, usize)>> {
    let malformed = || fail(line, StandoffIssue::MalformedOffsets(raw.to_string()));
    let mut frags = Vec::new();
    for part in raw.split(';') {
        let mut nums = part.split_whitespace();
        let (Some(s), Some(e), None) = (nums.next(), nums.next(), nums.next()) else {
            return Err(malformed());
        };
        let s: usize = s.parse().map_err(|_| malformed())?;
        let e: usize = e.parse().map_err(|_| malformed())?;
        if s >= e || e > text_len {
            return Err(malformed());
        }
        frags.push((s, e));
    }
    frags.sort_unstable();
    if frags.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(malformed());
    }
    Ok(frags)
}

/// Parses one tweet's standoff pair. `id` and `language` come from the
/// caller (file name and directory in a typical layout).
pub fn parse_standoff(
    id: &str,
    language: Language,
    ann_content: &str,
    txt_content: &str,
) -> Result<(Tweet, ArgumentAnnotation)> {
    let tweet = Tweet::new(id, language, txt_content)?;
    let text_len = tweet.char_len();

    let mut entries: Vec<(usize, StandoffEntry)> = Vec::new();
    let mut attributes: Vec<(usize, String, String)> = Vec::new();

    for (idx, raw_line) in ann_content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || line.starts_with('R') {
            continue;
        }
        let cols: Vec<&str> = line.splitn(3, '\t').collect();
        if line.starts_with('T') {
            if cols.len() != 3 {
                return Err(fail(line_no, StandoffIssue::MalformedLine(line.to_string())));
            }
            let (label, offsets) = cols[1]
                .split_once(' ')
                .ok_or_else(|| fail(line_no, StandoffIssue::MalformedOffsets(cols[1].to_string())))?;
            if !LABELS.contains(&label) {
                return Err(fail(line_no, StandoffIssue::UnknownLabel(label.to_string())));
            }
            let fragments = parse_offsets(offsets, line_no, text_len)?;
            let expected = covered_text(txt_content, &fragments);
            if expected != cols[2] {
                return Err(fail(
                    line_no,
                    StandoffIssue::CoveredTextMismatch {
                        expected,
                        found: cols[2].to_string(),
                    },
                ));
            }
            entries.push((
                line_no,
                StandoffEntry {
                    entry_id: cols[0].to_string(),
                    label: label.to_string(),
                    fragments,
                    covered_text: cols[2].to_string(),
                },
            ));
        } else if line.starts_with('A') || line.starts_with('M') {
            let parts: Vec<&str> = cols.get(1).map(|c| c.split_whitespace().collect()).unwrap_or_default();
            if cols.len() < 2 || parts.len() != 3 || parts[0] != TYPE_ATTRIBUTE {
                return Err(fail(line_no, StandoffIssue::MalformedLine(line.to_string())));
            }
            attributes.push((line_no, parts[1].to_string(), parts[2].to_string()));
        } else {
            return Err(fail(line_no, StandoffIssue::MalformedLine(line.to_string())));
        }
    }

    let mut by_label: HashMap<&str, (usize, &StandoffEntry)> = HashMap::new();
    for (line_no, entry) in &entries {
        if by_label.insert(entry.label.as_str(), (*line_no, entry)).is_some() {
            return Err(fail(*line_no, StandoffIssue::DuplicateEntry(entry.label.clone())));
        }
    }

    let argumentative = match (by_label.contains_key("Argumentative"), by_label.contains_key("NonArgumentative")) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => return Err(fail(0, StandoffIssue::ConflictingMarkers)),
        (false, false) => return Err(fail(0, StandoffIssue::MissingMarker)),
    };

    let mut types: HashMap<String, PropositionType> = HashMap::new();
    for (line_no, target, value) in attributes {
        if !entries.iter().any(|(_, e)| e.entry_id == target) {
            return Err(fail(line_no, StandoffIssue::UnknownTarget(target)));
        }
        let kind: PropositionType = value
            .parse()
            .map_err(|_| fail(line_no, StandoffIssue::InvalidType(value.clone())))?;
        if types.insert(target.clone(), kind).is_some() {
            return Err(fail(line_no, StandoffIssue::DuplicateEntry(format!("Type of {target}"))));
        }
    }

    let span_of = |label: &str| -> Result<Option<(usize, &StandoffEntry, Span)>> {
        match by_label.get(label) {
            None => Ok(None),
            Some(&(line_no, entry)) => {
                let span = Span::from_ranges(&entry.fragments)
                    .map_err(|_| fail(line_no, StandoffIssue::MalformedOffsets(format!("{:?}", entry.fragments))))?;
                Ok(Some((line_no, entry, span)))
            }
        }
    };
    let premise = |label: &str| -> Result<Option<Premise>> {
        match span_of(label)? {
            None => Ok(None),
            Some((line_no, entry, span)) => {
                let kind = types
                    .get(&entry.entry_id)
                    .copied()
                    .ok_or_else(|| fail(line_no, StandoffIssue::MissingType(entry.entry_id.clone())))?;
                Ok(Some(Premise::new(span, kind)))
            }
        }
    };

    let justification = premise("Justification")?;
    let conclusion = premise("Conclusion")?;
    let collective = span_of("Collective")?.map(|(_, _, s)| s);
    let property = span_of("Property")?.map(|(_, _, s)| s);
    let pivot_j = span_of("PivotJ")?.map(|(_, _, s)| s);
    let pivot_c = span_of("PivotC")?.map(|(_, _, s)| s);
    let pivot = match (pivot_j, pivot_c) {
        (Some(justification_side), Some(conclusion_side)) => Some(Pivot {
            justification_side,
            conclusion_side,
        }),
        (None, None) => None,
        (Some(_), None) => return Err(fail(0, StandoffIssue::MalformedLine("PivotJ without PivotC".into()))),
        (None, Some(_)) => return Err(fail(0, StandoffIssue::MalformedLine("PivotC without PivotJ".into()))),
    };

    let annotation = ArgumentAnnotation {
        argumentative,
        justification,
        conclusion,
        collective,
        property,
        pivot,
    };
    let report = validate(&tweet, &annotation, Mode::Lenient);
    if !report.passes() {
        return Err(Error::InvalidAnnotation {
            tweet: tweet.id.clone(),
            issues: report.errors(),
        });
    }
    Ok((tweet, annotation))
}

/// Renders a tweet and its annotation as `(ann, txt)` file contents.
pub fn write_standoff(tweet: &Tweet, annotation: &ArgumentAnnotation) -> (String, String) {
    let text = &tweet.raw_text;
    let mut entries: Vec<StandoffEntry> = Vec::new();
    let mut attrs: Vec<(String, PropositionType)> = Vec::new();
    let mut push = |label: &str, span: &Span| -> String {
        let fragments = span.ranges();
        let entry_id = format!("T{}", entries.len() + 1);
        entries.push(StandoffEntry {
            entry_id: entry_id.clone(),
            label: label.to_string(),
            covered_text: covered_text(text, &fragments),
            fragments,
        });
        entry_id
    };

    let whole = Span::single(0, tweet.char_len()).expect("tweet text is non-empty");
    let marker = if annotation.argumentative {
        "Argumentative"
    } else {
        "NonArgumentative"
    };
    push(marker, &whole);
    if let Some(p) = &annotation.justification {
        let id = push("Justification", &p.span);
        attrs.push((id, p.kind));
    }
    if let Some(p) = &annotation.conclusion {
        let id = push("Conclusion", &p.span);
        attrs.push((id, p.kind));
    }
    if let Some(s) = &annotation.collective {
        push("Collective", s);
    }
    if let Some(s) = &annotation.property {
        push("Property", s);
    }
    if let Some(p) = &annotation.pivot {
        push("PivotJ", &p.justification_side);
        push("PivotC", &p.conclusion_side);
    }

    let mut ann = String::new();
    for e in &entries {
        ann.push_str(&e.render());
        ann.push('\n');
    }
    for (i, (target, kind)) in attrs.iter().enumerate() {
        let value = match kind {
            PropositionType::Fact => "Fact",
            PropositionType::Value => "Value",
            PropositionType::Policy => "Policy",
        };
        let _ = writeln!(ann, "A{}\t{TYPE_ATTRIBUTE} {target} {value}", i + 1);
    }
    (ann, text.clone())
}
