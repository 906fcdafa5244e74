//! Hashtag body expansion.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Known words of one language, stored lowercase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationLexicon {
    words: HashSet<String>,
    max_chars: usize,
}

impl SegmentationLexicon {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: HashSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(Error::Empty("lexicon"));
        }
        let max_chars = words.iter().map(|w| w.chars().count()).max().unwrap_or(0);
        Ok(SegmentationLexicon { words, max_chars })
    }

    /// One word per line; blank lines and `#` comments skipped.
    pub fn from_lines(content: &str) -> Result<Self> {
        Self::new(content.lines().filter(|l| !l.trim_start().starts_with('#')))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Splits a hashtag body (without `#`) into lowercase words.
///
/// CamelCase bodies split at case boundaries. Other bodies are segmented
/// against the lexicon, minimizing out-of-lexicon chunks, then chunk count,
/// then preferring longer chunks from the left. Underscores separate parts.
pub fn expand_hashtag(tag_text: &str, lexicon: &SegmentationLexicon) -> Result<Vec<String>> {
    if tag_text.is_empty() {
        return Err(Error::EmptyHashtag);
    }
    let parts: Vec<&str> = tag_text.split('_').filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return Ok(vec![tag_text.to_lowercase()]);
    }
    let mut words = Vec::new();
    for part in parts {
        if is_camel_case(part) {
            words.extend(split_camel_case(part).into_iter().map(|w| w.to_lowercase()));
        } else {
            words.extend(segment(&part.to_lowercase(), lexicon));
        }
    }
    Ok(words)
}

fn is_camel_case(body: &str) -> bool {
    body.chars().skip(1).any(char::is_uppercase) && body.chars().any(char::is_lowercase)
}

fn split_camel_case(body: &str) -> Vec<String> {
    let chars: Vec<char> = body.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..chars.len() {
        let (prev, cur) = (chars[i - 1], chars[i]);
        let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
        let boundary = (prev.is_lowercase() && cur.is_uppercase())
            || (prev.is_uppercase() && cur.is_uppercase() && next_lower)
            || (prev.is_alphabetic() && cur.is_numeric())
            || (prev.is_numeric() && cur.is_alphabetic());
        if boundary {
            out.push(chars[start..i].iter().collect());
            start = i;
        }
    }
    out.push(chars[start..].iter().collect());
    out
}

/// Cost of a segmentation: (out-of-lexicon chunks, chunks).
type Cost = (usize, usize);

fn segment(body: &str, lexicon: &SegmentationLexicon) -> Vec<String> {
    let chars: Vec<char> = body.chars().collect();
    let n = chars.len();
    // best[i]: optimal segmentation of chars[i..]; next[i]: end of its first chunk
    let mut best: Vec<Cost> = vec![(0, 0); n + 1];
    let mut next = vec![n; n + 1];
    for i in (0..n).rev() {
        let mut chosen: Option<(Cost, usize)> = None;
        // longest first chunk first, so ties keep the leftmost-longest split
        for j in (i + 1..=n).rev() {
            let chunk: String = chars[i..j].iter().collect();
            let oov = usize::from(!lexicon.words.contains(&chunk));
            let (o, c) = best[j];
            let cost = (o + oov, c + 1);
            if chosen.is_none_or(|(b, _)| cost < b) {
                chosen = Some((cost, j));
            }
        }
        let (cost, j) = chosen.expect("at least one chunk");
        best[i] = cost;
        next[i] = j;
    }
    let mut words = Vec::new();
    let mut i = 0;
    while i < n {
        words.push(chars[i..next[i]].iter().collect());
        i = next[i];
    }
    words
}
