//! The selection cascade.
//!
//! ```text
//! candidates -> overlap_cands -> diversity_cands -> fluency_cands -> best
//!               dedup+rules      top-k WER          bottom-k PPL      argmax F1
//! ```
//!
//! Stage sizes are `clamp(min(cap, floor(n / 2)), 1, n)` with cap 5 for diversity
//! and 3 for fluency, so a lone admissible candidate is never discarded. Every
//! ranking tie goes to the smaller generation index. Each dropped candidate is
//! logged once, at the stage that dropped it.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constraints::{self, ConstraintConfig};
use crate::metrics::{wer, SemanticScore, WerScore};
use crate::scorers::{FluencyScore, FluencyScorer, SemanticScorer};
use crate::textkit::{tokenize, NormalizedText, TokenSeq};
use crate::translator::{Candidate, CandidateSet};
use crate::{Error, ErrorPolicy, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub constraints: ConstraintConfig,
    pub diversity_cap: usize,
    pub fluency_cap: usize,
    pub on_error: ErrorPolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            constraints: ConstraintConfig::default(),
            diversity_cap: 5,
            fluency_cap: 3,
            on_error: ErrorPolicy::Fail,
        }
    }
}

/// Scorers used by the fluency and semantic stages. Fallbacks are consulted
/// only under [`ErrorPolicy::Fallback`].
#[derive(Clone)]
pub struct Scorers {
    pub fluency: Arc<dyn FluencyScorer>,
    pub semantic: Arc<dyn SemanticScorer>,
    pub fluency_fallback: Option<Arc<dyn FluencyScorer>>,
    pub semantic_fallback: Option<Arc<dyn SemanticScorer>>,
}

impl Scorers {
    pub fn new(fluency: Arc<dyn FluencyScorer>, semantic: Arc<dyn SemanticScorer>) -> Self {
        Scorers {
            fluency,
            semantic,
            fluency_fallback: None,
            semantic_fallback: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Overlap,
    Diversity,
    Fluency,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectReason {
    Empty,
    SameAsSource,
    Duplicate { of: usize },
    SourceOverlap { run: usize, bound: usize },
    RepeatedNgram { n: usize },
    /// Ranked below the stage cut-off.
    BelowCutoff { rank: usize, kept: usize },
    /// Reached the last stage but another candidate scored higher.
    Outscored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub candidate: Candidate,
    pub stage: Stage,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scored<S> {
    pub candidate: Candidate,
    pub score: S,
}

/// A scorer failure that was covered by the local fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substitution {
    pub stage: Stage,
    pub failed: String,
    pub used: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub overlap_cands: Vec<Candidate>,
    pub diversity_cands: Vec<Scored<WerScore>>,
    pub fluency_cands: Vec<Scored<FluencyScore>>,
    pub semantic_scores: Vec<Scored<SemanticScore>>,
    pub best: Option<Candidate>,
    pub rejection_log: Vec<Rejection>,
    pub substitutions: Vec<Substitution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaphraseResult {
    pub id: String,
    pub source: NormalizedText,
    pub best: Option<NormalizedText>,
    pub trace: SelectionTrace,
}

/// `clamp(min(cap, floor(n / 2)), 1, n)`, and 0 for an empty stage.
pub fn selection_size(n: usize, cap: usize) -> usize {
    if n == 0 {
        0
    } else {
        cap.min(n / 2).clamp(1, n)
    }
}

/// Drops empty candidates, candidates equal to the source, later duplicates,
/// and candidates breaking a decoder restriction. Survivors keep input order.
pub fn dedup_overlap(
    source: &NormalizedText,
    cands: &[Candidate],
    cfg: &ConstraintConfig,
) -> Result<(Vec<Candidate>, Vec<Rejection>)> {
    let src_tokens = tokenize(source);
    if src_tokens.is_empty() {
        return Err(Error::invalid("source sentence is empty"));
    }
    let src_key = src_tokens.join();
    let effective = constraints::effective_config(src_tokens.len(), cfg);
    let mut first_seen: HashMap<String, usize> = HashMap::new();
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for c in cands {
        let tokens = tokenize(&c.text);
        let key = tokens.join();
        let reason = if tokens.is_empty() {
            Some(RejectReason::Empty)
        } else if key == src_key {
            Some(RejectReason::SameAsSource)
        } else if let Some(&of) = first_seen.get(&key) {
            Some(RejectReason::Duplicate { of })
        } else {
            first_seen.insert(key, c.generation_index);
            let report = constraints::check(&src_tokens, &tokens, cfg)?;
            if report.source_overlap_violation {
                Some(RejectReason::SourceOverlap {
                    run: report.overlap_run_length,
                    bound: effective.overlap_bound,
                })
            } else if report.repeated_ngram_violation {
                Some(RejectReason::RepeatedNgram {
                    n: cfg.no_repeat_ngram,
                })
            } else {
                None
            }
        };
        match reason {
            Some(reason) => rejected.push(Rejection {
                candidate: c.clone(),
                stage: Stage::Overlap,
                reason,
            }),
            None => kept.push(c.clone()),
        }
    }
    Ok((kept, rejected))
}

/// Orders by `better(a, b)` then generation index and splits at the stage size.
fn rank_and_cut<S: Clone>(
    mut scored: Vec<Scored<S>>,
    cap: usize,
    stage: Stage,
    better: impl Fn(&S, &S) -> std::cmp::Ordering,
) -> (Vec<Scored<S>>, Vec<Rejection>) {
    scored.sort_by(|a, b| {
        better(&a.score, &b.score).then(a.candidate.generation_index.cmp(&b.candidate.generation_index))
    });
    let kept = selection_size(scored.len(), cap);
    let dropped = scored.split_off(kept);
    let rejected = dropped
        .into_iter()
        .enumerate()
        .map(|(i, s)| Rejection {
            candidate: s.candidate,
            stage,
            reason: RejectReason::BelowCutoff { rank: kept + i, kept },
        })
        .collect();
    (scored, rejected)
}

/// Keeps the candidates with the highest word error rate against the source.
pub fn select_diversity(
    source: &TokenSeq,
    overlap_cands: &[Candidate],
    cap: usize,
) -> Result<(Vec<Scored<WerScore>>, Vec<Rejection>)> {
    let scored = overlap_cands
        .iter()
        .map(|c| {
            Ok(Scored {
                candidate: c.clone(),
                score: wer(source, &tokenize(&c.text))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_and_cut(scored, cap, Stage::Diversity, |a: &WerScore, b: &WerScore| {
        b.value.total_cmp(&a.value)
    }))
}

fn with_fallback<T>(
    stage: Stage,
    policy: ErrorPolicy,
    primary: (String, Result<T>),
    fallback: Option<(String, &dyn Fn() -> Result<T>)>,
    substitutions: &mut Vec<Substitution>,
) -> Result<T> {
    let (label, result) = primary;
    match (result, policy, fallback) {
        (Ok(v), _, _) => Ok(v),
        (Err(e), ErrorPolicy::Fallback, Some((used, run))) if e.is_transport() => {
            let v = run()?;
            substitutions.push(Substitution {
                stage,
                failed: label,
                used,
                error: e.to_string(),
            });
            Ok(v)
        }
        (Err(e), _, _) => Err(e),
    }
}

fn check_count<T>(got: Vec<T>, want: usize, label: &str) -> Result<Vec<T>> {
    if got.len() != want {
        return Err(Error::invalid(format!(
            "scorer {label} returned {} scores for {want} texts",
            got.len()
        )));
    }
    Ok(got)
}

/// Keeps the candidates with the lowest perplexity.
pub fn select_fluency(
    diversity_cands: &[Scored<WerScore>],
    scorers: &Scorers,
    cfg: &PipelineConfig,
    substitutions: &mut Vec<Substitution>,
) -> Result<(Vec<Scored<FluencyScore>>, Vec<Rejection>)> {
    if diversity_cands.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let texts: Vec<NormalizedText> = diversity_cands.iter().map(|s| s.candidate.text.clone()).collect();
    let fallback_run = || match &scorers.fluency_fallback {
        Some(f) => f.score_fluency(&texts),
        None => Err(Error::invalid("no fluency fallback configured")),
    };
    let fallback = scorers
        .fluency_fallback
        .as_ref()
        .map(|f| (f.label(), &fallback_run as &dyn Fn() -> Result<Vec<FluencyScore>>));
    let scores = with_fallback(
        Stage::Fluency,
        cfg.on_error,
        (scorers.fluency.label(), scorers.fluency.score_fluency(&texts)),
        fallback,
        substitutions,
    )?;
    let scores = check_count(scores, texts.len(), &scorers.fluency.label())?;
    let scored = diversity_cands
        .iter()
        .zip(scores)
        .map(|(s, score)| Scored {
            candidate: s.candidate.clone(),
            score,
        })
        .collect();
    Ok(rank_and_cut(scored, cfg.fluency_cap, Stage::Fluency, |a: &FluencyScore, b: &FluencyScore| {
        a.ppl.total_cmp(&b.ppl)
    }))
}

/// Scores every survivor against the source and picks the highest F1.
pub fn select_semantic(
    source: &NormalizedText,
    fluency_cands: &[Scored<FluencyScore>],
    scorers: &Scorers,
    cfg: &PipelineConfig,
    substitutions: &mut Vec<Substitution>,
) -> Result<(Vec<Scored<SemanticScore>>, Option<Candidate>)> {
    if fluency_cands.is_empty() {
        return Ok((Vec::new(), None));
    }
    let texts: Vec<NormalizedText> = fluency_cands.iter().map(|s| s.candidate.text.clone()).collect();
    let fallback_run = || match &scorers.semantic_fallback {
        Some(f) => f.score_semantic(source, &texts),
        None => Err(Error::invalid("no semantic fallback configured")),
    };
    let fallback = scorers
        .semantic_fallback
        .as_ref()
        .map(|f| (f.label(), &fallback_run as &dyn Fn() -> Result<Vec<SemanticScore>>));
    let scores = with_fallback(
        Stage::Semantic,
        cfg.on_error,
        (scorers.semantic.label(), scorers.semantic.score_semantic(source, &texts)),
        fallback,
        substitutions,
    )?;
    let scores = check_count(scores, texts.len(), &scorers.semantic.label())?;
    let scored: Vec<Scored<SemanticScore>> = fluency_cands
        .iter()
        .zip(scores)
        .map(|(s, score)| Scored {
            candidate: s.candidate.clone(),
            score,
        })
        .collect();
    let best = scored
        .iter()
        .min_by(|a, b| {
            b.score
                .f1
                .total_cmp(&a.score.f1)
                .then(a.candidate.generation_index.cmp(&b.candidate.generation_index))
        })
        .map(|s| s.candidate.clone());
    Ok((scored, best))
}

/// Runs all four stages over one candidate set.
pub fn run(
    id: &str,
    source: &NormalizedText,
    cands: &[Candidate],
    scorers: &Scorers,
    cfg: &PipelineConfig,
) -> Result<ParaphraseResult> {
    cfg.constraints.validate()?;
    if cfg.diversity_cap == 0 || cfg.fluency_cap == 0 {
        return Err(Error::invalid("stage caps must be positive"));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = cands.iter().find(|c| !seen.insert(c.generation_index)) {
        return Err(Error::invalid(format!(
            "generation_index {} appears twice",
            dup.generation_index
        )));
    }
    let mut ordered = cands.to_vec();
    ordered.sort_by_key(|c| c.generation_index);

    let mut trace = SelectionTrace::default();
    let (overlap, mut log) = dedup_overlap(source, &ordered, &cfg.constraints)?;
    let src_tokens = tokenize(source);
    let (diversity, dropped) = select_diversity(&src_tokens, &overlap, cfg.diversity_cap)?;
    log.extend(dropped);
    let (fluency, dropped) = select_fluency(&diversity, scorers, cfg, &mut trace.substitutions)?;
    log.extend(dropped);
    let (semantic, best) = select_semantic(source, &fluency, scorers, cfg, &mut trace.substitutions)?;
    for s in &semantic {
        if best.as_ref().map(|b| b.generation_index) != Some(s.candidate.generation_index) {
            log.push(Rejection {
                candidate: s.candidate.clone(),
                stage: Stage::Semantic,
                reason: RejectReason::Outscored,
            });
        }
    }

    trace.overlap_cands = overlap;
    trace.diversity_cands = diversity;
    trace.fluency_cands = fluency;
    trace.semantic_scores = semantic;
    trace.best = best;
    trace.rejection_log = log;
    Ok(ParaphraseResult {
        id: id.to_owned(),
        source: source.clone(),
        best: trace.best.as_ref().map(|c| c.text.clone()),
        trace,
    })
}

pub fn run_set(set: &CandidateSet, scorers: &Scorers, cfg: &PipelineConfig) -> Result<ParaphraseResult> {
    run(&set.id, &set.source, &set.candidates, scorers, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorers::{LocalSemantic, ScorerEndpoint, ScorerKind, RemoteScorer};
    use crate::textkit::normalize;
    use crate::transport::{JsonTransport, TransportError};
    use crate::translator::Lang;
    use std::time::Duration;

    /// Perplexity = number of characters, so shorter candidates win.
    struct LenFluency;

    impl FluencyScorer for LenFluency {
        fn label(&self) -> String {
            "len".into()
        }

        fn score_fluency(&self, texts: &[NormalizedText]) -> Result<Vec<FluencyScore>> {
            Ok(texts
                .iter()
                .map(|t| FluencyScore {
                    ppl: 1.0 + t.as_str().len() as f64,
                    token_count: None,
                })
                .collect())
        }
    }

    fn scorers() -> Scorers {
        Scorers::new(Arc::new(LenFluency), Arc::new(LocalSemantic::default()))
    }

    fn cands(texts: &[&str]) -> Vec<Candidate> {
        texts.iter().enumerate().map(|(i, t)| Candidate::direct(t, i, i)).collect()
    }

    #[test]
    fn selection_sizes() {
        assert_eq!(selection_size(0, 5), 0);
        assert_eq!(selection_size(1, 5), 1);
        assert_eq!(selection_size(8, 5), 4);
        assert_eq!(selection_size(20, 5), 5);
        assert_eq!(selection_size(4, 3), 2);
        assert_eq!(selection_size(5, 3), 2);
        assert_eq!(selection_size(11, 5), 5);
        assert_eq!(selection_size(5, 3), 2);
    }

    #[test]
    fn dedup_examples() {
        let src = normalize("the cat");
        let (kept, rej) = dedup_overlap(&src, &cands(&["The  cat", "the cat", "a dog"]), &ConstraintConfig::default()).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].text.as_str(), "a dog");
        assert!(rej.iter().all(|r| r.reason == RejectReason::SameAsSource));

        let mut cs = cands(&["a dog", "a dog"]);
        cs[1] = Candidate::roundtrip("A dog", Lang::new("fr").unwrap(), 0, 1);
        let (kept, rej) = dedup_overlap(&src, &cs, &ConstraintConfig::default()).unwrap();
        assert_eq!(kept[0].generation_index, 0);
        assert_eq!(rej[0].reason, RejectReason::Duplicate { of: 0 });

        let src = normalize("one two three four five six seven eight");
        let (kept, rej) = dedup_overlap(&src, &cands(&["x y z w x y z"]), &ConstraintConfig::default()).unwrap();
        assert!(kept.is_empty());
        assert_eq!((rej[0].stage, &rej[0].reason), (Stage::Overlap, &RejectReason::RepeatedNgram { n: 3 }));

        let (_, rej) = dedup_overlap(&src, &cands(&["one two three four five x"]), &ConstraintConfig::default()).unwrap();
        assert_eq!(rej[0].reason, RejectReason::SourceOverlap { run: 5, bound: 4 });

        let (_, rej) = dedup_overlap(&src, &cands(&["  "]), &ConstraintConfig::default()).unwrap();
        assert_eq!(rej[0].reason, RejectReason::Empty);
        assert!(dedup_overlap(&normalize(""), &[], &ConstraintConfig::default()).is_err());
    }

    #[test]
    fn semantic_prefers_reordering_over_disjoint() {
        let src = normalize("alpha beta gamma");
        let fl = vec![
            Scored {
                candidate: Candidate::direct("delta epsilon zeta", 0, 0),
                score: FluencyScore { ppl: 2.0, token_count: None },
            },
            Scored {
                candidate: Candidate::direct("gamma alpha beta", 1, 1),
                score: FluencyScore { ppl: 2.0, token_count: None },
            },
        ];
        let (scores, best) = select_semantic(&src, &fl, &scorers(), &PipelineConfig::default(), &mut Vec::new()).unwrap();
        assert_eq!(best.unwrap().generation_index, 1);
        assert!((scores[1].score.f1 - 1.0).abs() < 1e-12);
        let (_, none) = select_semantic(&src, &[], &scorers(), &PipelineConfig::default(), &mut Vec::new()).unwrap();
        assert!(none.is_none());
        let (_, single) = select_semantic(&src, &fl[..1], &scorers(), &PipelineConfig::default(), &mut Vec::new()).unwrap();
        assert_eq!(single.unwrap().generation_index, 0);
    }

    #[test]
    fn run_eleven_distinct() {
        let src = normalize("w0 w1 w2 w3 w4 w5 w6 w7 w8 w9");
        let texts: Vec<String> = (0..11).map(|i| format!("w0 x{i} w2 y{i} w4")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let r = run("id", &src, &cands(&refs), &scorers(), &PipelineConfig::default()).unwrap();
        assert_eq!(r.trace.overlap_cands.len(), 11);
        assert_eq!(r.trace.diversity_cands.len(), 5);
        assert_eq!(r.trace.fluency_cands.len(), 2);
        assert!(r.best.is_some());
        assert_eq!(r.trace.rejection_log.len(), 10);
        let again = run("id", &src, &cands(&refs), &scorers(), &PipelineConfig::default()).unwrap();
        assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&r).unwrap());
    }

    #[test]
    fn all_equal_to_source() {
        let src = normalize("the cat sat");
        let r = run("id", &src, &cands(&["The cat sat", "the  cat sat"]), &scorers(), &PipelineConfig::default()).unwrap();
        assert!(r.trace.overlap_cands.is_empty());
        assert!(r.best.is_none());
        assert_eq!(r.trace.rejection_log.len(), 2);
    }

    #[test]
    fn duplicate_generation_index_rejected() {
        let mut cs = cands(&["a", "b"]);
        cs[1].generation_index = 0;
        assert!(run("id", &normalize("s"), &cs, &scorers(), &PipelineConfig::default()).is_err());
    }

    struct Down;

    impl JsonTransport for Down {
        fn post_json(&self, _: &str, _: &serde_json::Value, _: Duration) -> Result<serde_json::Value, TransportError> {
            Err(TransportError::Connection("refused".into()))
        }
    }

    #[test]
    fn fallback_policy() {
        let remote = RemoteScorer::with_transport(ScorerEndpoint::new("http://down", ScorerKind::Semantic), Arc::new(Down)).unwrap();
        let mut s = Scorers::new(Arc::new(LenFluency), Arc::new(remote));
        let src = normalize("a b c d e f g h");
        let cs = cands(&["a b x y e f z w", "q r s t"]);
        let err = run("id", &src, &cs, &s, &PipelineConfig::default()).unwrap_err();
        assert!(err.is_transport());

        s.semantic_fallback = Some(Arc::new(LocalSemantic::default()));
        let cfg = PipelineConfig {
            on_error: ErrorPolicy::Fallback,
            ..Default::default()
        };
        let r = run("id", &src, &cs, &s, &cfg).unwrap();
        assert!(r.best.is_some());
        assert_eq!(r.trace.substitutions.len(), 1);
        assert_eq!(r.trace.substitutions[0].stage, Stage::Semantic);
        assert_eq!(r.trace.substitutions[0].used, "local-greedy-match");
    }
}
