//! Domain types for annotated tweets.
//!
//! All offsets are counted in Unicode scalar values (Rust `char`s), 0-based,
//! with exclusive ends. Standoff files and the JSONL corpus use the same
//! addressing, so no conversion happens at the codec boundary.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "en", alias = "EN")]
    En,
    #[serde(rename = "es", alias = "ES")]
    Es,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Es => "es",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(Language::En),
            "es" | "spanish" => Ok(Language::Es),
            _ => Err(Error::Format(format!("unknown language `{s}`"))),
        }
    }
}

/// Flags carried over from the HatEval source record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SourceFlags {
    pub hate_speech: bool,
    pub targeted_individual: bool,
    pub aggressive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tweet {
    pub id: String,
    pub language: Language,
    pub raw_text: String,
    pub source_flags: Option<SourceFlags>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, language: Language, raw_text: impl Into<String>) -> Result<Self> {
        let raw_text = raw_text.into();
        if raw_text.is_empty() {
            return Err(Error::EmptyText);
        }
        Ok(Tweet {
            id: id.into(),
            language,
            raw_text,
            source_flags: None,
        })
    }

    pub fn with_flags(mut self, flags: SourceFlags) -> Self {
        self.source_flags = Some(flags);
        self
    }

    /// Length of the raw text in characters.
    pub fn char_len(&self) -> usize {
        self.raw_text.chars().count()
    }
}

/// Slices `text` by character offsets. Panics if the range is out of bounds,
/// callers check bounds first.
pub fn char_slice(text: &str, start: usize, end: usize) -> &str {
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let from = indices.nth(start).expect("start within text");
    let to = if end == start {
        from
    } else {
        indices.nth(end - start - 1).expect("end within text")
    };
    &text[from..to]
}

/// A contiguous character range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fragment {
    start: usize,
    end: usize,
}

impl Fragment {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(Error::InvalidFragment { start, end });
        }
        Ok(Fragment { start, end })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.start < end && start < self.end
    }
}

/// An ordered list of non-overlapping fragments. Components may be split
/// into several discontinuous parts of the tweet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Span {
    fragments: Vec<Fragment>,
}

impl Span {
    /// Builds a span from fragments that must already be sorted and disjoint.
    pub fn new(fragments: Vec<Fragment>) -> Result<Self> {
        if fragments.is_empty() {
            return Err(Error::EmptySpan);
        }
        for pair in fragments.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(Error::OverlappingFragments {
                    first: (pair[0].start, pair[0].end),
                    second: (pair[1].start, pair[1].end),
                });
            }
        }
        Ok(Span { fragments })
    }

    pub fn from_ranges(ranges: &[(usize, usize)]) -> Result<Self> {
        let fragments = ranges
            .iter()
            .map(|&(s, e)| Fragment::new(s, e))
            .collect::<Result<Vec<_>>>()?;
        Span::new(fragments)
    }

    pub fn single(start: usize, end: usize) -> Result<Self> {
        Span::new(vec![Fragment::new(start, end)?])
    }

    /// Sorts and merges overlapping or touching ranges into a valid span.
    pub fn merged(mut ranges: Vec<(usize, usize)>) -> Result<Self> {
        ranges.retain(|&(s, e)| s < e);
        ranges.sort_unstable();
        let mut out: Vec<Fragment> = Vec::with_capacity(ranges.len());
        for (s, e) in ranges {
            match out.last_mut() {
                Some(last) if s <= last.end => last.end = last.end.max(e),
                _ => out.push(Fragment { start: s, end: e }),
            }
        }
        Span::new(out)
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn ranges(&self) -> Vec<(usize, usize)> {
        self.fragments.iter().map(|f| (f.start, f.end)).collect()
    }

    pub fn start(&self) -> usize {
        self.fragments[0].start
    }

    pub fn end(&self) -> usize {
        self.fragments[self.fragments.len() - 1].end
    }

    pub fn check_bounds(&self, len: usize) -> Result<()> {
        if self.end() > len {
            let last = self.fragments[self.fragments.len() - 1];
            return Err(Error::OutOfBounds {
                start: last.start,
                end: last.end,
                len,
            });
        }
        Ok(())
    }

    /// True if every character of `other` is covered by some fragment of `self`.
    pub fn covers(&self, other: &Span) -> bool {
        other.fragments.iter().all(|f| {
            let mut pos = f.start;
            for own in &self.fragments {
                if own.start <= pos && pos < own.end {
                    pos = own.end;
                }
                if pos >= f.end {
                    return true;
                }
            }
            pos >= f.end
        })
    }

    /// Text covered by each fragment.
    pub fn slices<'a>(&self, text: &'a str) -> Vec<&'a str> {
        self.fragments
            .iter()
            .map(|f| char_slice(text, f.start, f.end))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropositionType {
    Fact,
    Value,
    Policy,
}

impl PropositionType {
    pub const ALL: [PropositionType; 3] = [
        PropositionType::Fact,
        PropositionType::Value,
        PropositionType::Policy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropositionType::Fact => "fact",
            PropositionType::Value => "value",
            PropositionType::Policy => "policy",
        }
    }

    pub fn symbol(self) -> char {
        match self {
            PropositionType::Fact => 'F',
            PropositionType::Value => 'V',
            PropositionType::Policy => 'P',
        }
    }
}

impl fmt::Display for PropositionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropositionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fact" | "f" => Ok(PropositionType::Fact),
            "value" | "v" => Ok(PropositionType::Value),
            "policy" | "p" => Ok(PropositionType::Policy),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

/// A justification or conclusion together with its proposition type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Premise {
    pub span: Span,
    pub kind: PropositionType,
}

impl Premise {
    pub fn new(span: Span, kind: PropositionType) -> Self {
        Premise { span, kind }
    }
}

/// The common element linking the two premises, one word sequence in each.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pivot {
    pub justification_side: Span,
    pub conclusion_side: Span,
}

/// One annotator's judgement of one tweet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ArgumentAnnotation {
    pub argumentative: bool,
    pub justification: Option<Premise>,
    pub conclusion: Option<Premise>,
    pub collective: Option<Span>,
    pub property: Option<Span>,
    pub pivot: Option<Pivot>,
}

impl ArgumentAnnotation {
    pub fn non_argumentative() -> Self {
        ArgumentAnnotation::default()
    }

    pub fn argumentative(justification: Premise, conclusion: Premise) -> Self {
        ArgumentAnnotation {
            argumentative: true,
            justification: Some(justification),
            conclusion: Some(conclusion),
            ..Default::default()
        }
    }

    pub fn with_collective(mut self, span: Span) -> Self {
        self.collective = Some(span);
        self
    }

    pub fn with_property(mut self, span: Span) -> Self {
        self.property = Some(span);
        self
    }

    pub fn with_pivot(mut self, justification_side: Span, conclusion_side: Span) -> Self {
        self.pivot = Some(Pivot {
            justification_side,
            conclusion_side,
        });
        self
    }

    /// The span recorded for a span category. Pivot yields `None` here since
    /// it has two sides; see [`ArgumentAnnotation::category_ranges`].
    pub fn span(&self, category: SpanCategory) -> Option<&Span> {
        match category {
            SpanCategory::Justification => self.justification.as_ref().map(|p| &p.span),
            SpanCategory::Conclusion => self.conclusion.as_ref().map(|p| &p.span),
            SpanCategory::Collective => self.collective.as_ref(),
            SpanCategory::Property => self.property.as_ref(),
            SpanCategory::Pivot => None,
        }
    }

    /// Character ranges marked for a category; the pivot contributes both sides.
    pub fn category_ranges(&self, category: SpanCategory) -> Vec<(usize, usize)> {
        match category {
            SpanCategory::Pivot => self
                .pivot
                .as_ref()
                .map(|p| {
                    let mut r = p.justification_side.ranges();
                    r.extend(p.conclusion_side.ranges());
                    r
                })
                .unwrap_or_default(),
            other => self.span(other).map(Span::ranges).unwrap_or_default(),
        }
    }

    pub fn premise_type(&self, premise: PremiseKind) -> Option<PropositionType> {
        match premise {
            PremiseKind::Justification => self.justification.as_ref().map(|p| p.kind),
            PremiseKind::Conclusion => self.conclusion.as_ref().map(|p| p.kind),
        }
    }

    pub fn premise(&self, premise: PremiseKind) -> Option<&Premise> {
        match premise {
            PremiseKind::Justification => self.justification.as_ref(),
            PremiseKind::Conclusion => self.conclusion.as_ref(),
        }
    }
}

/// Categories annotated as word spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpanCategory {
    Collective,
    Property,
    Pivot,
    Justification,
    Conclusion,
}

impl SpanCategory {
    pub const ALL: [SpanCategory; 5] = [
        SpanCategory::Collective,
        SpanCategory::Property,
        SpanCategory::Pivot,
        SpanCategory::Justification,
        SpanCategory::Conclusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpanCategory::Collective => "Collective",
            SpanCategory::Property => "Property",
            SpanCategory::Pivot => "Pivot",
            SpanCategory::Justification => "Justification",
            SpanCategory::Conclusion => "Conclusion",
        }
    }
}

impl fmt::Display for SpanCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpanCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpanCategory::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PremiseKind {
    Justification,
    Conclusion,
}

impl PremiseKind {
    pub fn name(self) -> &'static str {
        match self {
            PremiseKind::Justification => "justification",
            PremiseKind::Conclusion => "conclusion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotationLayer {
    pub annotator_id: String,
    pub annotations: BTreeMap<String, ArgumentAnnotation>,
}

impl AnnotationLayer {
    pub fn new(annotator_id: impl Into<String>) -> Self {
        AnnotationLayer {
            annotator_id: annotator_id.into(),
            annotations: BTreeMap::new(),
        }
    }

    pub fn get(&self, tweet_id: &str) -> Option<&ArgumentAnnotation> {
        self.annotations.get(tweet_id)
    }

    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }
}

/// Tweets in corpus order plus any number of annotation layers keyed by
/// annotator id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotatedCorpus {
    tweets: Vec<Tweet>,
    index: BTreeMap<String, usize>,
    layers: BTreeMap<String, AnnotationLayer>,
}

impl AnnotatedCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tweets(tweets: impl IntoIterator<Item = Tweet>) -> Result<Self> {
        let mut corpus = Self::new();
        for tweet in tweets {
            corpus.push_tweet(tweet)?;
        }
        Ok(corpus)
    }

    pub fn push_tweet(&mut self, tweet: Tweet) -> Result<()> {
        if tweet.raw_text.is_empty() {
            return Err(Error::EmptyText);
        }
        if self.index.contains_key(&tweet.id) {
            return Err(Error::DuplicateTweet(tweet.id));
        }
        self.index.insert(tweet.id.clone(), self.tweets.len());
        self.tweets.push(tweet);
        Ok(())
    }

    /// Records one annotation in the named layer, creating the layer on first use.
    pub fn annotate(&mut self, annotator: &str, tweet_id: &str, annotation: ArgumentAnnotation) -> Result<()> {
        if !self.index.contains_key(tweet_id) {
            return Err(Error::UnknownTweet {
                layer: annotator.to_string(),
                tweet: tweet_id.to_string(),
            });
        }
        self.layers
            .entry(annotator.to_string())
            .or_insert_with(|| AnnotationLayer::new(annotator))
            .annotations
            .insert(tweet_id.to_string(), annotation);
        Ok(())
    }

    pub fn add_layer(&mut self, layer: AnnotationLayer) -> Result<()> {
        if let Some(id) = layer.annotations.keys().find(|id| !self.index.contains_key(*id)) {
            return Err(Error::UnknownTweet {
                layer: layer.annotator_id.clone(),
                tweet: id.clone(),
            });
        }
        self.layers.insert(layer.annotator_id.clone(), layer);
        Ok(())
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn tweet(&self, id: &str) -> Option<&Tweet> {
        self.index.get(id).map(|&i| &self.tweets[i])
    }

    pub fn layers(&self) -> &BTreeMap<String, AnnotationLayer> {
        &self.layers
    }

    pub fn layer(&self, annotator: &str) -> Result<&AnnotationLayer> {
        self.layers
            .get(annotator)
            .ok_or_else(|| Error::UnknownLayer(annotator.to_string()))
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    /// Tweets in corpus order that both layers annotate.
    pub fn shared<'a>(
        &'a self,
        a: &'a AnnotationLayer,
        b: &'a AnnotationLayer,
    ) -> impl Iterator<Item = (&'a Tweet, &'a ArgumentAnnotation, &'a ArgumentAnnotation)> + 'a {
        self.tweets
            .iter()
            .filter_map(move |t| Some((t, a.get(&t.id)?, b.get(&t.id)?)))
    }

    /// Tweets in corpus order annotated by `layer`.
    pub fn annotated<'a>(
        &'a self,
        layer: &'a AnnotationLayer,
    ) -> impl Iterator<Item = (&'a Tweet, &'a ArgumentAnnotation)> + 'a {
        self.tweets
            .iter()
            .filter_map(move |t| Some((t, layer.get(&t.id)?)))
    }

    /// Merges another corpus into this one. Tweets already present must carry
    /// identical text; layers are merged annotation by annotation.
    pub fn merge(&mut self, other: AnnotatedCorpus) -> Result<()> {
        for tweet in other.tweets {
            match self.tweet(&tweet.id) {
                Some(existing) if existing.raw_text == tweet.raw_text => {}
                Some(_) => return Err(Error::DuplicateTweet(tweet.id)),
                None => self.push_tweet(tweet)?,
            }
        }
        for (name, layer) in other.layers {
            for (id, ann) in layer.annotations {
                self.annotate(&name, &id, ann)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_slice_handles_multibyte() {
        let text = "año 🔥 ok";
        assert_eq!(char_slice(text, 0, 3), "año");
        assert_eq!(char_slice(text, 4, 5), "🔥");
        assert_eq!(char_slice(text, 6, 8), "ok");
        assert_eq!(char_slice(text, 8, 8), "");
    }

    #[test]
    fn span_rejects_overlap_and_empty() {
        assert!(matches!(Span::new(vec![]), Err(Error::EmptySpan)));
        assert!(matches!(
            Span::from_ranges(&[(0, 5), (4, 8)]),
            Err(Error::OverlappingFragments { .. })
        ));
        assert!(matches!(Fragment::new(3, 3), Err(Error::InvalidFragment { .. })));
        // touching fragments are fine
        assert!(Span::from_ranges(&[(0, 4), (4, 8)]).is_ok());
    }

    #[test]
    fn merged_span_sorts_and_joins() {
        let span = Span::merged(vec![(10, 12), (0, 3), (2, 5), (5, 6)]).unwrap();
        assert_eq!(span.ranges(), vec![(0, 6), (10, 12)]);
    }

    #[test]
    fn covers_across_touching_fragments() {
        let outer = Span::from_ranges(&[(0, 5), (5, 10), (20, 30)]).unwrap();
        assert!(outer.covers(&Span::single(3, 8).unwrap()));
        assert!(outer.covers(&Span::from_ranges(&[(0, 2), (22, 30)]).unwrap()));
        assert!(!outer.covers(&Span::single(8, 12).unwrap()));
        assert!(!outer.covers(&Span::single(19, 21).unwrap()));
    }

    #[test]
    fn corpus_rejects_duplicates_and_unknown_ids() {
        let mut corpus = AnnotatedCorpus::new();
        corpus.push_tweet(Tweet::new("1", Language::En, "hi").unwrap()).unwrap();
        assert!(matches!(
            corpus.push_tweet(Tweet::new("1", Language::En, "again").unwrap()),
            Err(Error::DuplicateTweet(_))
        ));
        assert!(matches!(
            corpus.annotate("a", "2", ArgumentAnnotation::non_argumentative()),
            Err(Error::UnknownTweet { .. })
        ));
        assert!(Tweet::new("x", Language::Es, "").is_err());
    }
}
