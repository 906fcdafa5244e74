//! Soft tweet normalization with a raw-to-normalized offset map.
//!
//! Rules run in a fixed order: user handles, hashtags, emoji, character
//! repetitions. Each rule rewrites whole segments; the composed offset map
//! sends every raw character consumed by a rewrite to the full rewritten
//! segment, and untouched characters one-to-one.

mod emoji;
mod hashtag;

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use emoji::{replace_emoji, EmojiTable};
pub use hashtag::{expand_hashtag, SegmentationLexicon};

use crate::error::{Error, Result};
use crate::model::{Language, Span, Tweet};

pub const HANDLE_TOKEN: &str = "@usuario";
pub const HASHTAG_TOKEN: &str = "hashtag";
pub const EMOJI_TOKEN: &str = "emoji";
pub const MAX_REPEAT: usize = 3;

const BUNDLED_EMOJI: &str = include_str!("../../data/emoji.tsv");
const BUNDLED_LEXICON_EN: &str = include_str!("../../data/lexicon_en.txt");
const BUNDLED_LEXICON_ES: &str = include_str!("../../data/lexicon_es.txt");

/// One aligned piece of the offset map. `verbatim` segments copy characters
/// one-to-one (so raw and normalized lengths match); all others are rewrites
/// addressed only as a whole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetSegment {
    pub raw_start: usize,
    pub raw_end: usize,
    pub norm_start: usize,
    pub norm_end: usize,
    pub verbatim: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedText {
    pub text: String,
    pub offset_map: Vec<OffsetSegment>,
}

impl NormalizedText {
    pub fn raw_len(&self) -> usize {
        self.offset_map.last().map_or(0, |s| s.raw_end)
    }

    pub fn is_identity(&self) -> bool {
        self.offset_map.iter().all(|s| s.verbatim)
    }
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// A handle or hashtag marker opens a token only after a boundary that is
/// neither a word character nor another marker.
fn marker_at(chars: &[char], i: usize, marker: char) -> Option<usize> {
    if chars[i] != marker {
        return None;
    }
    if i > 0 && (is_word(chars[i - 1]) || matches!(chars[i - 1], '#' | '@')) {
        return None;
    }
    let end = i + 1 + chars[i + 1..].iter().take_while(|&&c| is_word(c)).count();
    (end > i + 1).then_some(end)
}

/// Output of one rewrite rule: new text plus segments relative to its input.
#[derive(Debug, Default)]
pub(crate) struct Stage {
    pub(crate) text: String,
    segs: Vec<OffsetSegment>,
    out_len: usize,
}

impl Stage {
    fn keep(&mut self, at: usize, c: char) {
        self.text.push(c);
        self.segs.push(OffsetSegment {
            raw_start: at,
            raw_end: at + 1,
            norm_start: self.out_len,
            norm_end: self.out_len + 1,
            verbatim: true,
        });
        self.out_len += 1;
    }

    fn rewrite(&mut self, start: usize, end: usize, replacement: &str) {
        let n = replacement.chars().count();
        self.text.push_str(replacement);
        self.segs.push(OffsetSegment {
            raw_start: start,
            raw_end: end,
            norm_start: self.out_len,
            norm_end: self.out_len + n,
            verbatim: false,
        });
        self.out_len += n;
    }

    fn last_char(&self) -> Option<char> {
        self.text.chars().next_back()
    }
}

fn handle_stage(chars: &[char]) -> Stage {
    let mut st = Stage::default();
    let mut i = 0;
    while i < chars.len() {
        if let Some(end) = marker_at(chars, i, '@') {
            st.rewrite(i, end, HANDLE_TOKEN);
            i = end;
        } else {
            st.keep(i, chars[i]);
            i += 1;
        }
    }
    st
}

fn hashtag_stage(chars: &[char], lexicon: &SegmentationLexicon) -> Stage {
    let mut st = Stage::default();
    let mut i = 0;
    while i < chars.len() {
        if let Some(end) = marker_at(chars, i, '#') {
            let body: String = chars[i + 1..end].iter().collect();
            let words = expand_hashtag(&body, lexicon).expect("hashtag body is non-empty");
            st.rewrite(i, end, &format!("{HASHTAG_TOKEN} {}", words.join(" ")));
            i = end;
        } else {
            st.keep(i, chars[i]);
            i += 1;
        }
    }
    st
}

pub(crate) fn emoji_stage(chars: &[char], table: &EmojiTable) -> Stage {
    let mut st = Stage::default();
    let mut i = 0;
    while i < chars.len() {
        if let Some((len, name)) = table.longest_match(chars, i) {
            let mut out = String::new();
            if st.last_char().is_some_and(|c| !c.is_whitespace()) {
                out.push(' ');
            }
            out.push_str(EMOJI_TOKEN);
            if !name.is_empty() {
                out.push(' ');
                out.push_str(name);
            }
            out.push(' ');
            out.push_str(EMOJI_TOKEN);
            if chars.get(i + len).is_some_and(|c| !c.is_whitespace()) {
                out.push(' ');
            }
            st.rewrite(i, i + len, &out);
            i += len;
        } else {
            st.keep(i, chars[i]);
            i += 1;
        }
    }
    st
}

fn repetition_stage(chars: &[char]) -> Stage {
    let mut st = Stage::default();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let run = chars[i..].iter().take_while(|&&x| x == c).count();
        if run > MAX_REPEAT {
            let capped: String = std::iter::repeat_n(c, MAX_REPEAT).collect();
            st.rewrite(i, i + run, &capped);
        } else {
            for k in i..i + run {
                st.keep(k, c);
            }
        }
        i += run;
    }
    st
}

/// Caps every run of one repeated character at three.
pub fn cap_repetitions(text: &str) -> String {
    repetition_stage(&text.chars().collect::<Vec<_>>()).text
}

/// Rewrites user handles to `@usuario`. E-mail addresses are left alone
/// since their `@` follows a word character.
pub fn replace_handles(text: &str) -> String {
    handle_stage(&text.chars().collect::<Vec<_>>()).text
}

/// Composes `first` (raw -> mid) with `second` (mid -> out) into raw -> out.
/// Segments whose raw images overlap are fused into one rewrite.
fn compose(first: &[OffsetSegment], second: &[OffsetSegment]) -> Vec<OffsetSegment> {
    let mut out: Vec<OffsetSegment> = Vec::with_capacity(second.len());
    let mut k = 0;
    for s in second {
        while first[k].norm_end <= s.raw_start {
            k += 1;
        }
        let mut j = k;
        let mut raw_start = usize::MAX;
        let mut raw_end = 0;
        let mut verbatim = s.verbatim;
        while j < first.len() && first[j].norm_start < s.raw_end {
            raw_start = raw_start.min(first[j].raw_start);
            raw_end = raw_end.max(first[j].raw_end);
            verbatim &= first[j].verbatim;
            j += 1;
        }
        let seg = OffsetSegment {
            raw_start,
            raw_end,
            norm_start: s.norm_start,
            norm_end: s.norm_end,
            verbatim,
        };
        match out.last_mut() {
            Some(prev) if seg.raw_start < prev.raw_end => {
                prev.raw_end = prev.raw_end.max(seg.raw_end);
                prev.norm_end = seg.norm_end;
                prev.verbatim = false;
            }
            _ => out.push(seg),
        }
    }
    out
}

/// Fuses runs of adjacent verbatim segments.
fn coalesce(segs: Vec<OffsetSegment>) -> Vec<OffsetSegment> {
    let mut out: Vec<OffsetSegment> = Vec::with_capacity(segs.len());
    for s in segs {
        match out.last_mut() {
            Some(prev)
                if prev.verbatim && s.verbatim && prev.raw_end == s.raw_start && prev.norm_end == s.norm_start =>
            {
                prev.raw_end = s.raw_end;
                prev.norm_end = s.norm_end;
            }
            _ => out.push(s),
        }
    }
    out
}

/// Lexicons per language plus the emoji table.
#[derive(Debug, Clone)]
pub struct Normalizer {
    lexicons: HashMap<Language, SegmentationLexicon>,
    emoji: EmojiTable,
}

impl Normalizer {
    pub fn new(lexicons: HashMap<Language, SegmentationLexicon>, emoji: EmojiTable) -> Self {
        Normalizer { lexicons, emoji }
    }

    /// The lexicons and emoji table shipped with the crate.
    pub fn bundled() -> &'static Normalizer {
        static BUNDLED: OnceLock<Normalizer> = OnceLock::new();
        BUNDLED.get_or_init(|| {
            let mut lexicons = HashMap::new();
            lexicons.insert(
                Language::En,
                SegmentationLexicon::from_lines(BUNDLED_LEXICON_EN).expect("bundled English lexicon"),
            );
            lexicons.insert(
                Language::Es,
                SegmentationLexicon::from_lines(BUNDLED_LEXICON_ES).expect("bundled Spanish lexicon"),
            );
            Normalizer::new(lexicons, EmojiTable::from_tsv(BUNDLED_EMOJI).expect("bundled emoji table"))
        })
    }

    /// Loads `lexicon_en.txt`, `lexicon_es.txt` and `emoji.tsv` from `dir`,
    /// falling back to the bundled asset for any file that is absent.
    pub fn from_dir(dir: &Path) -> Result<Normalizer> {
        let bundled = Normalizer::bundled();
        let read = |name: &str| -> Result<Option<String>> {
            let p = dir.join(name);
            if p.exists() {
                Ok(Some(std::fs::read_to_string(p)?))
            } else {
                Ok(None)
            }
        };
        let mut lexicons = bundled.lexicons.clone();
        for lang in [Language::En, Language::Es] {
            if let Some(content) = read(&format!("lexicon_{}.txt", lang.code()))? {
                lexicons.insert(lang, SegmentationLexicon::from_lines(&content)?);
            }
        }
        let emoji = match read("emoji.tsv")? {
            Some(content) => EmojiTable::from_tsv(&content)?,
            None => bundled.emoji.clone(),
        };
        Ok(Normalizer::new(lexicons, emoji))
    }

    pub fn lexicon(&self, language: Language) -> Result<&SegmentationLexicon> {
        self.lexicons
            .get(&language)
            .ok_or_else(|| Error::Format(format!("no lexicon for language {language}")))
    }

    pub fn emoji_table(&self) -> &EmojiTable {
        &self.emoji
    }

    pub fn normalize(&self, tweet: &Tweet) -> NormalizedText {
        self.normalize_text(&tweet.raw_text, tweet.language)
    }

    pub fn normalize_text(&self, text: &str, language: Language) -> NormalizedText {
        let lexicon = self
            .lexicons
            .get(&language)
            .or_else(|| self.lexicons.values().next())
            .expect("normalizer has at least one lexicon");
        let raw: Vec<char> = text.chars().collect();
        if raw.is_empty() {
            return NormalizedText {
                text: String::new(),
                offset_map: Vec::new(),
            };
        }
        let s1 = handle_stage(&raw);
        let s2 = hashtag_stage(&s1.text.chars().collect::<Vec<_>>(), lexicon);
        let s3 = emoji_stage(&s2.text.chars().collect::<Vec<_>>(), &self.emoji);
        let s4 = repetition_stage(&s3.text.chars().collect::<Vec<_>>());
        let map = compose(&compose(&compose(&s1.segs, &s2.segs), &s3.segs), &s4.segs);
        NormalizedText {
            text: s4.text,
            offset_map: coalesce(map),
        }
    }
}

/// Maps a raw-text span onto the normalized text. Rewritten segments are
/// taken whole; verbatim segments map character by character.
pub fn project_span(span: &Span, nm: &NormalizedText) -> Result<Span> {
    let raw_len = nm.raw_len();
    span.check_bounds(raw_len)?;
    let mut ranges = Vec::new();
    for f in span.fragments() {
        let (s, e) = (f.start(), f.end());
        let first = nm.offset_map.partition_point(|seg| seg.raw_end <= s);
        for seg in nm.offset_map[first..].iter().take_while(|seg| seg.raw_start < e) {
            if seg.verbatim {
                let lo = s.max(seg.raw_start) - seg.raw_start;
                let hi = e.min(seg.raw_end) - seg.raw_start;
                ranges.push((seg.norm_start + lo, seg.norm_start + hi));
            } else {
                ranges.push((seg.norm_start, seg.norm_end));
            }
        }
    }
    Span::merged(ranges)
}
