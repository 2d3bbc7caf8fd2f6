//! Structural checks every cascade result must satisfy.

use std::collections::BTreeSet;

use parasift_core::pipeline::{RejectReason, Stage};
use parasift_core::{tokenize, Candidate, NGramLanguageModel, NormalizedText, ParaphraseResult};

use super::oracle;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn indices<'a>(it: impl Iterator<Item = &'a Candidate>) -> BTreeSet<usize> {
    it.map(|c| c.generation_index).collect()
}

pub fn check(
    source: &NormalizedText,
    cands: &[Candidate],
    r: &ParaphraseResult,
    lm: &NGramLanguageModel,
) -> Result<(), String> {
    let t = &r.trace;
    let input = indices(cands.iter());
    let overlap = indices(t.overlap_cands.iter());
    let diversity = indices(t.diversity_cands.iter().map(|s| &s.candidate));
    let fluency = indices(t.fluency_cands.iter().map(|s| &s.candidate));
    ensure!(fluency.is_subset(&diversity), "fluency not within diversity");
    ensure!(diversity.is_subset(&overlap), "diversity not within overlap");
    ensure!(overlap.is_subset(&input), "overlap not within input");

    // overlap stage against the oracle
    let src = tokenize(source);
    let mut ordered = cands.to_vec();
    ordered.sort_by_key(|c| c.generation_index);
    let mut seen = BTreeSet::new();
    let mut expect = BTreeSet::new();
    for c in &ordered {
        let tk = tokenize(&c.text);
        let key = tk.tokens().to_vec();
        let fresh = seen.insert(key.clone());
        if !tk.is_empty() && key != src.tokens() && fresh && oracle::passes_constraints(&src, &tk) {
            expect.insert(c.generation_index);
        }
    }
    ensure!(overlap == expect, "overlap stage {overlap:?}, oracle {expect:?}");

    // diversity: highest word error rate first, ties to the smaller index
    let mut by_wer: Vec<(f64, usize)> = t
        .overlap_cands
        .iter()
        .map(|c| {
            let d = oracle::edit_distance_table(&src, &tokenize(&c.text));
            (d as f64 / src.len() as f64, c.generation_index)
        })
        .collect();
    by_wer.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let want: BTreeSet<usize> = by_wer.iter().take(oracle::stage_size(by_wer.len(), 5)).map(|x| x.1).collect();
    ensure!(diversity == want, "diversity {diversity:?}, oracle {want:?}");

    // fluency: lowest perplexity first
    let mut by_ppl: Vec<(f64, usize)> = t
        .diversity_cands
        .iter()
        .map(|s| (lm.perplexity(&tokenize(&s.candidate.text)).unwrap().ppl, s.candidate.generation_index))
        .collect();
    by_ppl.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let want: BTreeSet<usize> = by_ppl.iter().take(oracle::stage_size(by_ppl.len(), 3)).map(|x| x.1).collect();
    ensure!(fluency == want, "fluency {fluency:?}, oracle {want:?}");

    // best: semantic argmax, ties to the smaller index
    ensure!(t.best.is_some() == !overlap.is_empty(), "best presence disagrees with overlap_cands");
    if let Some(best) = &t.best {
        ensure!(fluency.contains(&best.generation_index), "best outside fluency_cands");
        let top = t
            .semantic_scores
            .iter()
            .max_by(|a, b| {
                a.score
                    .f1
                    .total_cmp(&b.score.f1)
                    .then(b.candidate.generation_index.cmp(&a.candidate.generation_index))
            })
            .unwrap();
        ensure!(top.candidate.generation_index == best.generation_index, "best is not the argmax");
        ensure!(r.best.as_ref() == Some(&best.text), "result best differs from trace best");
    }

    // every input is either best or logged exactly once, at the right stage
    let mut logged = BTreeSet::new();
    for rej in &t.rejection_log {
        let gi = rej.candidate.generation_index;
        ensure!(logged.insert(gi), "candidate {gi} logged twice");
        let stage_ok = match rej.stage {
            Stage::Overlap => !overlap.contains(&gi),
            Stage::Diversity => overlap.contains(&gi) && !diversity.contains(&gi),
            Stage::Fluency => diversity.contains(&gi) && !fluency.contains(&gi),
            Stage::Semantic => fluency.contains(&gi) && rej.reason == RejectReason::Outscored,
        };
        ensure!(stage_ok, "candidate {gi} logged at {:?} ({:?})", rej.stage, rej.reason);
    }
    if let Some(b) = &t.best {
        ensure!(!logged.contains(&b.generation_index), "best is also logged");
        logged.insert(b.generation_index);
    }
    ensure!(logged == input, "log covers {} of {} candidates", logged.len(), input.len());
    Ok(())
}

