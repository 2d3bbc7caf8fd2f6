//! Workloads shared by the benchmarks.

use std::sync::Arc;

use parasift_core::scorers::{HashedCharNgramEmbedder, LmParams, LocalFluency, LocalSemantic};
use parasift_core::translator::MockTranslator;
use parasift_core::{normalize, Candidate, NGramLanguageModel, NormalizedText, Scorers, TokenSeq};

pub const LM_CORPUS: &str = include_str!("../../core/data/lm_corpus.txt");
pub const DEMO_TABLES: &str = include_str!("../../core/data/demo_tables.json");
pub const DEMO_SOURCES: &str = include_str!("../../core/data/demo_sources.jsonl");

pub fn demo_lm() -> NGramLanguageModel {
    NGramLanguageModel::train(LM_CORPUS.lines().map(normalize), LmParams::default()).expect("bundled corpus")
}

pub fn demo_scorers(lm: NGramLanguageModel) -> Scorers {
    Scorers::new(
        Arc::new(LocalFluency::new(Arc::new(lm))),
        Arc::new(LocalSemantic::new(HashedCharNgramEmbedder::default(), None)),
    )
}

pub fn demo_translator() -> MockTranslator {
    MockTranslator::from_json(DEMO_TABLES).expect("bundled tables")
}

pub fn demo_sources() -> Vec<(String, NormalizedText)> {
    DEMO_SOURCES
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).expect("bundled sources");
            (v["id"].as_str().unwrap().to_owned(), normalize(v["text"].as_str().unwrap()))
        })
        .collect()
}

/// Deterministic pseudo-random token sequence over a `vocab`-word alphabet.
pub fn tokens(len: usize, vocab: u64, seed: u64) -> TokenSeq {
    let mut x = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    (0..len)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            format!("w{}", x % vocab)
        })
        .collect()
}

/// `n` direct candidates of 6 to 15 tokens drawn from the LM corpus vocabulary.
pub fn candidates(n: usize) -> Vec<Candidate> {
    let lines: Vec<&str> = LM_CORPUS.lines().collect();
    (0..n)
        .map(|i| Candidate::direct(lines[(i * 37) % lines.len()], i, i))
        .collect()
}
