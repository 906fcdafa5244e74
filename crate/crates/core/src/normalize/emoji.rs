//! Emoji short-name table and replacement.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// Maps emoji code point sequences to lowercase short names.
#[derive(Debug, Clone, Default)]
pub struct EmojiTable {
    names: HashMap<String, String>,
    first_chars: HashSet<char>,
    max_chars: usize,
}

impl EmojiTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, emoji: &str, short_name: &str) {
        let Some(first) = emoji.chars().next() else {
            return;
        };
        self.first_chars.insert(first);
        self.max_chars = self.max_chars.max(emoji.chars().count());
        self.names.insert(emoji.to_string(), spoken_name(short_name));
    }

    /// Parses `codepoints<TAB>short_name` lines, code points as hyphen-joined hex.
    pub fn from_tsv(content: &str) -> Result<Self> {
        let mut table = EmojiTable::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Schema {
                line: i + 1,
                message: msg.to_string(),
            };
            let (cps, name) = line.split_once('\t').ok_or_else(|| bad("expected two tab-separated columns"))?;
            let emoji = cps
                .split('-')
                .map(|h| u32::from_str_radix(h, 16).ok().and_then(char::from_u32))
                .collect::<Option<String>>()
                .ok_or_else(|| bad("bad code point sequence"))?;
            table.insert(&emoji, name);
        }
        if table.names.is_empty() {
            return Err(Error::Empty("emoji table"));
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Longest table entry starting at `chars[i]`, as (length in chars, name).
    pub(crate) fn longest_match(&self, chars: &[char], i: usize) -> Option<(usize, &str)> {
        if !self.first_chars.contains(&chars[i]) {
            return None;
        }
        let max = self.max_chars.min(chars.len() - i);
        (1..=max).rev().find_map(|len| {
            let key: String = chars[i..i + len].iter().collect();
            self.names.get(&key).map(|n| (len, n.as_str()))
        })
    }
}

/// Lowercase, with anything but letters and digits turned into single spaces.
fn spoken_name(short_name: &str) -> String {
    short_name
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Replaces every mapped emoji by `emoji <name> emoji`; unmapped symbols pass through.
pub fn replace_emoji(text: &str, table: &EmojiTable) -> String {
    super::emoji_stage(&text.chars().collect::<Vec<_>>(), table).text
}
