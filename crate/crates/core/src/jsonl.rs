//! Canonical JSONL corpus format, one tweet per line.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AnnotatedCorpus, ArgumentAnnotation, Fragment, Language, Pivot, Premise, PropositionType, SourceFlags, Span,
    Tweet,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpanRecord {
    fragments: Vec<[usize; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PremiseRecord {
    fragments: Vec<[usize; 2]>,
    #[serde(rename = "type")]
    kind: PropositionType,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PivotRecord {
    just_side: SpanRecord,
    conc_side: SpanRecord,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRecord {
    argumentative: bool,
    #[serde(default)]
    justification: Option<PremiseRecord>,
    #[serde(default)]
    conclusion: Option<PremiseRecord>,
    #[serde(default)]
    collective: Option<SpanRecord>,
    #[serde(default)]
    property: Option<SpanRecord>,
    #[serde(default)]
    pivot: Option<PivotRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TweetRecord {
    id: String,
    language: Language,
    text: String,
    #[serde(default)]
    source_flags: Option<SourceFlags>,
    #[serde(default)]
    layers: BTreeMap<String, LayerRecord>,
}

fn span_record(span: &Span) -> SpanRecord {
    SpanRecord {
        fragments: span.fragments().iter().map(|f| [f.start(), f.end()]).collect(),
    }
}

fn span_from(fragments: &[[usize; 2]]) -> Result<Span> {
    let frags = fragments
        .iter()
        .map(|&[s, e]| Fragment::new(s, e))
        .collect::<Result<Vec<_>>>()?;
    Span::new(frags)
}

impl From<&ArgumentAnnotation> for LayerRecord {
    fn from(a: &ArgumentAnnotation) -> Self {
        let premise = |p: &Premise| PremiseRecord {
            fragments: span_record(&p.span).fragments,
            kind: p.kind,
        };
        LayerRecord {
            argumentative: a.argumentative,
            justification: a.justification.as_ref().map(premise),
            conclusion: a.conclusion.as_ref().map(premise),
            collective: a.collective.as_ref().map(span_record),
            property: a.property.as_ref().map(span_record),
            pivot: a.pivot.as_ref().map(|p| PivotRecord {
                just_side: span_record(&p.justification_side),
                conc_side: span_record(&p.conclusion_side),
            }),
        }
    }
}

impl LayerRecord {
    fn into_annotation(self) -> Result<ArgumentAnnotation> {
        let premise = |p: PremiseRecord| -> Result<Premise> { Ok(Premise::new(span_from(&p.fragments)?, p.kind)) };
        Ok(ArgumentAnnotation {
            argumentative: self.argumentative,
            justification: self.justification.map(premise).transpose()?,
            conclusion: self.conclusion.map(premise).transpose()?,
            collective: self.collective.map(|s| span_from(&s.fragments)).transpose()?,
            property: self.property.map(|s| span_from(&s.fragments)).transpose()?,
            pivot: self
                .pivot
                .map(|p| -> Result<Pivot> {
                    Ok(Pivot {
                        justification_side: span_from(&p.just_side.fragments)?,
                        conclusion_side: span_from(&p.conc_side.fragments)?,
                    })
                })
                .transpose()?,
        })
    }
}

/// Reads a corpus; errors carry the 1-based line number.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<AnnotatedCorpus> {
    let mut corpus = AnnotatedCorpus::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| Error::Schema {
            line: line_no,
            message,
        };
        let record: TweetRecord = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        let mut tweet = Tweet::new(record.id, record.language, record.text).map_err(|e| schema(e.to_string()))?;
        tweet.source_flags = record.source_flags;
        let id = tweet.id.clone();
        let len = tweet.char_len();
        corpus.push_tweet(tweet).map_err(|e| schema(e.to_string()))?;
        for (annotator, layer) in record.layers {
            let ann = layer.into_annotation().map_err(|e| schema(format!("layer `{annotator}`: {e}")))?;
            check_bounds(&ann, len).map_err(|e| schema(format!("layer `{annotator}`: {e}")))?;
            corpus.annotate(&annotator, &id, ann)?;
        }
    }
    Ok(corpus)
}

fn check_bounds(a: &ArgumentAnnotation, len: usize) -> Result<()> {
    let spans = a
        .justification
        .iter()
        .chain(a.conclusion.iter())
        .map(|p| &p.span)
        .chain(a.collective.iter())
        .chain(a.property.iter())
        .chain(a.pivot.iter().flat_map(|p| [&p.justification_side, &p.conclusion_side]));
    for span in spans {
        span.check_bounds(len)?;
    }
    Ok(())
}

/// Serializes one tweet with every layer that annotates it.
pub fn tweet_line(corpus: &AnnotatedCorpus, tweet: &Tweet) -> Result<String> {
    let layers = corpus
        .layers()
        .iter()
        .filter_map(|(name, layer)| layer.get(&tweet.id).map(|a| (name.clone(), LayerRecord::from(a))))
        .collect();
    let record = TweetRecord {
        id: tweet.id.clone(),
        language: tweet.language,
        text: tweet.raw_text.clone(),
        source_flags: tweet.source_flags,
        layers,
    };
    Ok(serde_json::to_string(&record)?)
}

pub fn write_jsonl<W: Write>(corpus: &AnnotatedCorpus, mut writer: W) -> Result<()> {
    for tweet in corpus.tweets() {
        writeln!(writer, "{}", tweet_line(corpus, tweet)?)?;
    }
    Ok(())
}

pub fn to_jsonl_string(corpus: &AnnotatedCorpus) -> Result<String> {
    let mut buf = Vec::new();
    write_jsonl(corpus, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}
