//! Shared loaders for the bundled demo data.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use parasift_core::scorers::{HashedCharNgramEmbedder, LmParams, LocalFluency, LocalSemantic};
use parasift_core::translator::MockTranslator;
use parasift_core::{normalize, LabeledExample, NGramLanguageModel, NormalizedText, Scorers};
use serde::Deserialize;

pub mod contract;
pub mod invariants;
pub mod oracle;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/protocol").join(name)
}

pub fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[derive(Deserialize)]
struct SourceLine {
    id: String,
    text: String,
}

pub fn demo_sources() -> Vec<(String, NormalizedText)> {
    read(data("demo_sources.jsonl"))
        .lines()
        .map(|l| {
            let s: SourceLine = serde_json::from_str(l).unwrap();
            (s.id, normalize(&s.text))
        })
        .collect()
}

pub fn labeled_toy() -> Vec<LabeledExample> {
    read(data("labeled_toy.jsonl"))
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

pub fn demo_lm() -> NGramLanguageModel {
    let corpus = read(data("lm_corpus.txt"));
    NGramLanguageModel::train(corpus.lines().map(normalize), LmParams::default()).unwrap()
}

pub fn demo_translator() -> MockTranslator {
    MockTranslator::from_json(&read(data("demo_tables.json"))).unwrap()
}

pub fn identity_translator() -> MockTranslator {
    MockTranslator::from_json(&read(data("identity_roundtrip_tables.json"))).unwrap()
}

pub fn local_scorers(lm: NGramLanguageModel) -> Scorers {
    Scorers::new(
        Arc::new(LocalFluency::new(Arc::new(lm))),
        Arc::new(LocalSemantic::new(HashedCharNgramEmbedder::default(), None)),
    )
}

use parasift_core::translator::Candidate;
use parasift_core::Lang;
use rand::seq::SliceRandom;
use rand::Rng;

fn words(rng: &mut impl Rng, prefix: &str, vocab: usize, len: usize) -> Vec<String> {
    (0..len).map(|_| format!("{prefix}{}", rng.gen_range(0..vocab))).collect()
}

/// A source plus a candidate set mixing every kind of rejectable candidate:
/// empties, copies of the source, duplicates, heavy overlap and repeats.
/// Generation indices are a random permutation.
pub fn random_case(rng: &mut impl Rng, n: usize) -> (NormalizedText, Vec<Candidate>) {
    let src_len = rng.gen_range(1..=12);
    let source = words(rng, "w", 10, src_len);
    let mut texts: Vec<String> = Vec::with_capacity(n);
    for _ in 0..n {
        let text = match rng.gen_range(0..10) {
            0 => String::new(),
            1 => source.join(" "),
            2 if !texts.is_empty() => texts.choose(rng).unwrap().clone(),
            3 => {
                let mut t = source.clone();
                let i = rng.gen_range(0..t.len());
                t[i] = "edited".into();
                t.join(" ")
            }
            4 => {
                let g = words(rng, "w", 10, 3).join(" ");
                format!("{g} and {g}")
            }
            _ => {
                let len = rng.gen_range(1..=12);
                words(rng, "w", 14, len).join(" ")
            }
        };
        texts.push(text);
    }
    let mut index: Vec<usize> = (0..n).collect();
    index.shuffle(rng);
    let pivots = ["ko", "fr", "ja"];
    let cands = texts
        .iter()
        .zip(index)
        .enumerate()
        .map(|(rank, (t, gi))| {
            if rng.gen_bool(0.5) {
                Candidate::direct(t, rank, gi)
            } else {
                let p = Lang::new(pivots.choose(rng).unwrap()).unwrap();
                Candidate::roundtrip(t, p, 0, gi)
            }
        })
        .collect();
    (normalize(&source.join(" ")), cands)
}

/// `n` candidates that all survive the overlap stage.
pub fn admissible_case(rng: &mut impl Rng, n: usize) -> (NormalizedText, Vec<Candidate>) {
    let source = normalize("s0 s1 s2 s3 s4 s5 s6 s7");
    let cands = (0..n)
        .map(|i| {
            let mut t = vec![format!("u{i}")];
            let len = rng.gen_range(0..6);
            let mut pool: Vec<usize> = (0..40).collect();
            pool.shuffle(rng);
            t.extend(pool[..len].iter().map(|k| format!("c{k}")));
            Candidate::direct(&t.join(" "), i, i)
        })
        .collect();
    (source, cands)
}
