//! Word inventory used for per-word labels.
//!
//! Words are whitespace-delimited chunks with leading and trailing
//! punctuation peeled off one character at a time, and internal slashes
//! split out as their own tokens. `#` and `@` are kept attached so that
//! hashtags and handles stay whole words.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::Span;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// Character offset of the first character.
    pub start: usize,
    /// Exclusive character offset.
    pub end: usize,
}

fn is_peelable(c: char) -> bool {
    !(c.is_alphanumeric() || c.is_whitespace() || c == '#' || c == '@' || c == '_')
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        split_chunk(&chars, start, i, &mut tokens);
    }
    tokens
}

fn split_chunk(chars: &[char], start: usize, end: usize, out: &mut Vec<Token>) {
    let mut lo = start;
    let mut hi = end;
    while lo < hi && is_peelable(chars[lo]) {
        push(chars, lo, lo + 1, out);
        lo += 1;
    }
    let mut trailing = Vec::new();
    while hi > lo && is_peelable(chars[hi - 1]) {
        trailing.push(hi - 1);
        hi -= 1;
    }
    let mut piece = lo;
    for k in lo..hi {
        if chars[k] == '/' {
            if piece < k {
                push(chars, piece, k, out);
            }
            push(chars, k, k + 1, out);
            piece = k + 1;
        }
    }
    if piece < hi {
        push(chars, piece, hi, out);
    }
    for k in trailing.into_iter().rev() {
        push(chars, k, k + 1, out);
    }
}

fn push(chars: &[char], start: usize, end: usize, out: &mut Vec<Token>) {
    out.push(Token {
        text: chars[start..end].iter().collect(),
        start,
        end,
    });
}

/// Flags every token that shares at least one character with a fragment
/// of `span`. `text_len` is the character length of the tokenized text.
pub fn span_to_token_mask(span: &Span, tokens: &[Token], text_len: usize) -> Result<Vec<bool>> {
    span.check_bounds(text_len)?;
    Ok(ranges_to_token_mask(&span.ranges(), tokens))
}

/// Same membership rule over raw `(start, end)` ranges, which may be empty
/// or overlap. Used where several spans are pooled into one mask.
pub fn ranges_to_token_mask(ranges: &[(usize, usize)], tokens: &[Token]) -> Vec<bool> {
    tokens
        .iter()
        .map(|t| ranges.iter().any(|&(s, e)| t.start < e && s < t.end))
        .collect()
}
