use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::metrics::{TokenEmbedder, TokenWeights};
use crate::textkit::{tokenize, NormalizedText};
use crate::{Error, Result};

pub const EMBEDDING_DIM: usize = 256;
pub const DEFAULT_HASH_SEED: u64 = 42;

/// Embeds a token as the signed, hash-bucketed sum of its character 3- to
/// 5-grams (the token is wrapped in `<` and `>` first), then L2-normalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedCharNgramEmbedder {
    seed: u64,
}

impl Default for HashedCharNgramEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_HASH_SEED)
    }
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    // final avalanche so low bits depend on every byte
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^ (h >> 33)
}

impl HashedCharNgramEmbedder {
    pub fn new(seed: u64) -> Self {
        HashedCharNgramEmbedder { seed }
    }

    pub fn embed_token(&self, token: &str) -> Vec<f64> {
        let padded: Vec<char> = std::iter::once('<')
            .chain(token.chars())
            .chain(std::iter::once('>'))
            .collect();
        let mut v = vec![0.0; EMBEDDING_DIM];
        let mut buf = String::new();
        for n in 3..=5 {
            for gram in padded.windows(n) {
                buf.clear();
                buf.extend(gram);
                self.accumulate(&mut v, buf.as_bytes());
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            // hashed features cancelled out; fall back to the whole token
            self.accumulate(&mut v, token.as_bytes());
            return v;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }

    fn accumulate(&self, v: &mut [f64], bytes: &[u8]) {
        let h = fnv1a(self.seed, bytes);
        let bucket = (h % EMBEDDING_DIM as u64) as usize;
        v[bucket] += if h >> 63 == 0 { 1.0 } else { -1.0 };
    }
}

impl TokenEmbedder for HashedCharNgramEmbedder {
    fn embed(&self, tokens: &[String]) -> Vec<Vec<f64>> {
        tokens.iter().map(|t| self.embed_token(t)).collect()
    }
}

/// Smoothed inverse document frequency: `ln((1 + N) / (1 + df)) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    document_count: u64,
    df: HashMap<String, u64>,
}

impl IdfTable {
    pub fn build<I>(corpus: I) -> Result<Self>
    where
        I: IntoIterator<Item = NormalizedText>,
    {
        let mut df: HashMap<String, u64> = HashMap::new();
        let mut document_count = 0u64;
        for doc in corpus {
            document_count += 1;
            let toks = tokenize(&doc);
            let unique: HashSet<&String> = toks.iter().collect();
            for t in unique {
                *df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        if document_count == 0 {
            return Err(Error::invalid("idf corpus is empty"));
        }
        Ok(IdfTable { document_count, df })
    }

    pub fn document_count(&self) -> u64 {
        self.document_count
    }

    pub fn document_frequency(&self, token: &str) -> u64 {
        self.df.get(token).copied().unwrap_or(0)
    }
}

impl TokenWeights for IdfTable {
    fn weight(&self, token: &str) -> f64 {
        let n = self.document_count as f64;
        ((1.0 + n) / (1.0 + self.document_frequency(token) as f64)).ln() + 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textkit::normalize;

    fn cos(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn embedder_is_deterministic_and_unit_norm() {
        let e = HashedCharNgramEmbedder::default();
        assert_eq!(e.embed_token("cat"), e.embed_token("cat"));
        for tok in ["cat", "a", "무엇입니까", "don't", "."] {
            let v = e.embed_token(tok);
            assert_eq!(v.len(), EMBEDDING_DIM);
            assert!((cos(&v, &v) - 1.0).abs() < 1e-9);
        }
        assert_ne!(e.embed_token("cat"), HashedCharNgramEmbedder::new(7).embed_token("cat"));
    }

    #[test]
    fn morphological_neighbours_are_closer() {
        let e = HashedCharNgramEmbedder::default();
        let cat = e.embed_token("cat");
        let near = cos(&cat, &e.embed_token("cats"));
        let far = cos(&cat, &e.embed_token("xyz"));
        // "<cat" and "<ca", "cat" are shared with "cats"
        assert!(near > far, "{near} vs {far}");
        assert!(near > 0.4);
    }

    #[test]
    fn idf_formula() {
        let idf = IdfTable::build(["a b", "a c"].map(normalize)).unwrap();
        assert_eq!(idf.weight("a"), 1.0);
        assert!((idf.weight("b") - ((3.0f64 / 2.0).ln() + 1.0)).abs() < 1e-15);
        assert!((idf.weight("zzz") - (3.0f64.ln() + 1.0)).abs() < 1e-15);
        assert!(IdfTable::build(Vec::new()).is_err());
        // repeated tokens in one document count once
        let idf = IdfTable::build(["x x x", "y"].map(normalize)).unwrap();
        assert_eq!(idf.document_frequency("x"), 1);
    }
}
