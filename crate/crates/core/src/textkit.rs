//! Text normalization, tokenization, and n-gram helpers.
//!
//! All scoring in the cascade happens on [`NormalizedText`]: lowercased with
//! whitespace runs collapsed to a single ASCII space. Tokenization splits on
//! whitespace and detaches leading/trailing punctuation, which keeps it
//! language-agnostic (Hangul and CJK text pass through untouched).

use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::{Error, Result};

/// Lowercased, whitespace-collapsed, trimmed text.
/// Deserializing normalizes, so raw JSON strings are accepted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(from = "String", into = "String")]
pub struct NormalizedText(String);

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for NormalizedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NormalizedText {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl From<NormalizedText> for String {
    fn from(t: NormalizedText) -> String {
        t.0
    }
}

impl From<&str> for NormalizedText {
    fn from(raw: &str) -> Self {
        normalize(raw)
    }
}

impl From<String> for NormalizedText {
    fn from(raw: String) -> Self {
        normalize(&raw)
    }
}

/// Ordered word tokens. Every token is non-empty and free of whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// Single-space concatenation.
    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl std::ops::Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<'a> IntoIterator for &'a TokenSeq {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSeq {
    /// Builds a sequence from pre-split tokens, dropping empty ones and
    /// splitting any that contain whitespace.
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut out = Vec::new();
        for tok in iter {
            let tok: String = tok.into();
            out.extend(tok.split_whitespace().map(str::to_owned));
        }
        TokenSeq(out)
    }
}

/// Lowercases per character and collapses every whitespace run to one ASCII space.
pub fn normalize(raw: &str) -> NormalizedText {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for ch in raw.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.extend(ch.to_lowercase());
    }
    NormalizedText(out)
}

pub fn is_punctuation(ch: char) -> bool {
    matches!(
        get_general_category(ch),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Splits on whitespace and detaches each leading or trailing punctuation
/// character as its own token. Interior punctuation (`don't`, `e.g`) stays.
pub fn tokenize(text: &NormalizedText) -> TokenSeq {
    let mut out = Vec::new();
    for word in text.as_str().split_whitespace() {
        split_word(word, &mut out);
    }
    TokenSeq(out)
}

/// Convenience for `tokenize(&normalize(raw))`.
pub fn tokenize_raw(raw: &str) -> TokenSeq {
    tokenize(&normalize(raw))
}

fn split_word(word: &str, out: &mut Vec<String>) {
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let mut lo = 0;
    while lo < chars.len() && is_punctuation(chars[lo].1) {
        out.push(chars[lo].1.to_string());
        lo += 1;
    }
    if lo == chars.len() {
        return;
    }
    let mut hi = chars.len();
    while hi > lo && is_punctuation(chars[hi - 1].1) {
        hi -= 1;
    }
    let start = chars[lo].0;
    let end = chars.get(hi).map_or(word.len(), |&(i, _)| i);
    out.push(word[start..end].to_owned());
    for &(_, ch) in &chars[hi..] {
        out.push(ch.to_string());
    }
}

/// Contiguous windows of `n` tokens, in order.
pub fn ngrams(seq: &TokenSeq, n: usize) -> Result<Vec<&[String]>> {
    if n == 0 {
        return Err(Error::invalid("n-gram order must be at least 1"));
    }
    Ok(seq.0.windows(n).collect())
}

/// Length of the longest common contiguous token run shared by `a` and `b`.
pub fn longest_contiguous_overlap(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    // run[j] = length of the common suffix ending at a[i-1], b[j-1]
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut best = 0;
    for ai in a {
        for (j, bj) in b.iter().enumerate() {
            cur[j + 1] = if ai == bj { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}
