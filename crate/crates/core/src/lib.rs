//! Toolkit for argument-annotated hate-speech tweet corpora.
//!
//! The crate covers the whole life of a corpus: reading standoff
//! annotations and the canonical JSONL format, protocol validation, soft
//! tweet normalization with offset tracking, inter-annotator agreement
//! (Cohen's kappa with the 50% span-overlap rule), token and sequence
//! evaluation metrics, corpus statistics, and deterministic experiment
//! manifests with scoring of prediction files.

pub mod agreement;
pub mod cli;
pub mod error;
pub mod export;
pub mod hateval;
pub mod jsonl;
pub mod metrics;
pub mod model;
pub mod normalize;
pub mod plan;
pub mod plot;
pub mod standoff;
pub mod stats;
pub mod tokenize;
pub mod validate;

pub use error::{Error, Result};
pub use model::{
    AnnotatedCorpus, AnnotationLayer, ArgumentAnnotation, Fragment, Language, Pivot, Premise, PremiseKind,
    PropositionType, SourceFlags, Span, SpanCategory, Tweet,
};
