//! Token-classification export in a CoNLL-style block format.
//!
//! ```text
//! # id=<tweet-id>
//! token<TAB>label
//! ...
//! <blank line>
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AnnotatedCorpus, AnnotationLayer, ArgumentAnnotation, Span, SpanCategory, Tweet};
use crate::normalize::{project_span, Normalizer};
use crate::tokenize::{ranges_to_token_mask, tokenize, Token};

pub const IN: &str = "IN";
pub const OUT: &str = "OUT";
pub const FIRST: &str = "A";
pub const SECOND: &str = "B";

/// The two pairs of components annotated in the same step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JointPair {
    CollectiveProperty,
    JustificationConclusion,
}

impl JointPair {
    /// Ordered pair; the first category wins on overlapping tokens.
    pub fn categories(self) -> (SpanCategory, SpanCategory) {
        match self {
            JointPair::CollectiveProperty => (SpanCategory::Collective, SpanCategory::Property),
            JointPair::JustificationConclusion => (SpanCategory::Justification, SpanCategory::Conclusion),
        }
    }
}

impl FromStr for JointPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<String> = s
            .split(['+', '/', ',', '-'])
            .map(|p| p.trim().to_ascii_lowercase())
            .collect();
        match parts.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["collective", "property"] => Ok(JointPair::CollectiveProperty),
            ["justification", "conclusion"] => Ok(JointPair::JustificationConclusion),
            _ => Err(Error::InvalidJointPair(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExportTarget {
    Single(SpanCategory),
    Joint(JointPair),
}

impl ExportTarget {
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            ExportTarget::Single(_) => &[IN, OUT],
            ExportTarget::Joint(_) => &[FIRST, SECOND, OUT],
        }
    }
}

impl fmt::Display for ExportTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExportTarget::Single(c) => write!(f, "{c}"),
            ExportTarget::Joint(p) => {
                let (a, b) = p.categories();
                write!(f, "{a}+{b}")
            }
        }
    }
}

impl FromStr for ExportTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.contains(['+', '/', ',']) {
            return s.parse().map(ExportTarget::Joint);
        }
        s.parse().map(ExportTarget::Single)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBlock {
    pub id: String,
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportWarning {
    pub tweet_id: String,
    pub token_index: usize,
    pub message: String,
}

/// Tokens of the text a block is built from, plus a projector from raw spans
/// onto that text.
pub(crate) struct TokenView {
    pub(crate) tokens: Vec<Token>,
    normalized: Option<crate::normalize::NormalizedText>,
}

impl TokenView {
    pub(crate) fn new(tweet: &Tweet, normalizer: Option<&Normalizer>) -> Self {
        match normalizer {
            Some(n) => {
                let nm = n.normalize(tweet);
                TokenView {
                    tokens: tokenize(&nm.text),
                    normalized: Some(nm),
                }
            }
            None => TokenView {
                tokens: tokenize(&tweet.raw_text),
                normalized: None,
            },
        }
    }

    pub(crate) fn project(&self, span: &Span) -> Result<Span> {
        match &self.normalized {
            Some(nm) => project_span(span, nm),
            None => Ok(span.clone()),
        }
    }

    pub(crate) fn mask(&self, ann: &ArgumentAnnotation, category: SpanCategory) -> Result<Vec<bool>> {
        let spans: Vec<&Span> = match category {
            SpanCategory::Pivot => ann
                .pivot
                .iter()
                .flat_map(|p| [&p.justification_side, &p.conclusion_side])
                .collect(),
            other => ann.span(other).into_iter().collect(),
        };
        let mut ranges = Vec::new();
        for span in spans {
            ranges.extend(self.project(span)?.ranges());
        }
        Ok(ranges_to_token_mask(&ranges, &self.tokens))
    }
}

/// Labels one tweet's tokens for `target`.
pub fn tweet_block(
    tweet: &Tweet,
    annotation: &ArgumentAnnotation,
    target: ExportTarget,
    normalizer: Option<&Normalizer>,
) -> Result<(TokenBlock, Vec<ExportWarning>)> {
    let view = TokenView::new(tweet, normalizer);
    let mut warnings = Vec::new();
    let labels: Vec<String> = match target {
        ExportTarget::Single(cat) => view
            .mask(annotation, cat)?
            .into_iter()
            .map(|m| if m { IN } else { OUT }.to_string())
            .collect(),
        ExportTarget::Joint(pair) => {
            let (first, second) = pair.categories();
            let a = view.mask(annotation, first)?;
            let b = view.mask(annotation, second)?;
            a.iter()
                .zip(&b)
                .enumerate()
                .map(|(i, (&in_a, &in_b))| {
                    if in_a && in_b {
                        warnings.push(ExportWarning {
                            tweet_id: tweet.id.clone(),
                            token_index: i,
                            message: format!(
                                "token `{}` is in both {first} and {second}; labelled {first}",
                                view.tokens[i].text
                            ),
                        });
                    }
                    match (in_a, in_b) {
                        (true, _) => FIRST,
                        (false, true) => SECOND,
                        _ => OUT,
                    }
                    .to_string()
                })
                .collect()
        }
    };
    let block = TokenBlock {
        id: tweet.id.clone(),
        tokens: view.tokens.into_iter().map(|t| t.text).collect(),
        labels,
    };
    Ok((block, warnings))
}

/// One block per corpus tweet, in corpus order. With a normalizer, tokens
/// come from the normalized text and spans are projected onto it.
pub fn export_token_classification(
    corpus: &AnnotatedCorpus,
    layer: &AnnotationLayer,
    target: ExportTarget,
    normalizer: Option<&Normalizer>,
) -> Result<(Vec<TokenBlock>, Vec<ExportWarning>)> {
    let mut blocks = Vec::with_capacity(corpus.len());
    let mut warnings = Vec::new();
    for tweet in corpus.tweets() {
        let ann = layer
            .get(&tweet.id)
            .ok_or_else(|| Error::MissingAnnotation(tweet.id.clone()))?;
        let (block, w) = tweet_block(tweet, ann, target, normalizer)?;
        blocks.push(block);
        warnings.extend(w);
    }
    Ok((blocks, warnings))
}

pub fn render_conll(blocks: &[TokenBlock]) -> String {
    let mut out = String::new();
    for (i, b) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str("# id=");
        out.push_str(&b.id);
        out.push('\n');
        for (t, l) in b.tokens.iter().zip(&b.labels) {
            out.push_str(t);
            out.push('\t');
            out.push_str(l);
            out.push('\n');
        }
    }
    out
}

pub fn parse_conll(content: &str) -> Result<Vec<TokenBlock>> {
    let mut blocks: Vec<TokenBlock> = Vec::new();
    let mut current: Option<TokenBlock> = None;
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            blocks.extend(current.take());
            continue;
        }
        if let Some(id) = line.strip_prefix("# id=") {
            blocks.extend(current.take());
            current = Some(TokenBlock {
                id: id.to_string(),
                tokens: Vec::new(),
                labels: Vec::new(),
            });
            continue;
        }
        let block = current.as_mut().ok_or_else(|| Error::Schema {
            line: line_no,
            message: "token line before any `# id=` header".into(),
        })?;
        let (tok, label) = line.split_once('\t').ok_or_else(|| Error::Schema {
            line: line_no,
            message: "expected `token<TAB>label`".into(),
        })?;
        block.tokens.push(tok.to_string());
        block.labels.push(label.to_string());
    }
    blocks.extend(current);
    Ok(blocks)
}
