//! Sentence metrics: word error rate, BLEU / isacrebleu, and greedy-matching
//! semantic similarity.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::textkit::TokenSeq;
use crate::{Error, Result};

/// Word-level edit distance normalized by source length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WerScore {
    pub value: f64,
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

impl WerScore {
    pub fn edits(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

/// Word error rate of `candidate` against `source`. Higher means the candidate
/// departs further from the source wording.
pub fn wer(source: &[String], candidate: &[String]) -> Result<WerScore> {
    if source.is_empty() {
        return Err(Error::invalid("word error rate needs a non-empty source"));
    }
    let (n, m) = (source.len(), candidate.len());
    let mut dist = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in dist.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in dist[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = dist[i - 1][j - 1] + usize::from(source[i - 1] != candidate[j - 1]);
            dist[i][j] = sub.min(dist[i - 1][j] + 1).min(dist[i][j - 1] + 1);
        }
    }

    let (mut i, mut j) = (n, m);
    let (mut s, mut ins, mut del) = (0, 0, 0);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let same = source[i - 1] == candidate[j - 1];
            if dist[i][j] == dist[i - 1][j - 1] + usize::from(!same) {
                s += usize::from(!same);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dist[i][j] == dist[i - 1][j] + 1 {
            del += 1;
            i -= 1;
        } else {
            ins += 1;
            j -= 1;
        }
    }
    debug_assert_eq!(s + ins + del, dist[n][m]);
    Ok(WerScore {
        value: dist[n][m] as f64 / n as f64,
        substitutions: s,
        insertions: ins,
        deletions: del,
    })
}

pub const BLEU_MAX_ORDER: usize = 4;

/// Sufficient statistics for BLEU. Sentence statistics add up to corpus statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BleuStats {
    pub matches: [usize; BLEU_MAX_ORDER],
    pub totals: [usize; BLEU_MAX_ORDER],
    pub candidate_len: usize,
    pub reference_len: usize,
}

impl std::ops::AddAssign for BleuStats {
    fn add_assign(&mut self, rhs: Self) {
        for k in 0..BLEU_MAX_ORDER {
            self.matches[k] += rhs.matches[k];
            self.totals[k] += rhs.totals[k];
        }
        self.candidate_len += rhs.candidate_len;
        self.reference_len += rhs.reference_len;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    /// 0..=100
    pub value: f64,
    pub precisions: [f64; BLEU_MAX_ORDER],
    pub brevity_penalty: f64,
}

fn count_ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

impl BleuStats {
    /// Clipped n-gram matches of one candidate against its references. The
    /// reference length is the one closest to the candidate length, shorter on ties.
    pub fn from_sentence(candidate: &[String], references: &[TokenSeq]) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::invalid("BLEU needs at least one reference"));
        }
        if references.iter().all(|r| r.is_empty()) {
            return Err(Error::invalid("BLEU references are all empty"));
        }
        let mut stats = BleuStats {
            candidate_len: candidate.len(),
            reference_len: closest_ref_len(candidate.len(), references),
            ..Default::default()
        };
        for n in 1..=BLEU_MAX_ORDER {
            let cand = count_ngrams(candidate, n);
            let mut max_ref: HashMap<&[String], usize> = HashMap::new();
            for r in references {
                for (gram, c) in count_ngrams(r, n) {
                    let slot = max_ref.entry(gram).or_insert(0);
                    *slot = (*slot).max(c);
                }
            }
            stats.totals[n - 1] = candidate.len().saturating_sub(n - 1);
            stats.matches[n - 1] = cand
                .iter()
                .map(|(gram, &c)| c.min(max_ref.get(gram).copied().unwrap_or(0)))
                .sum();
        }
        Ok(stats)
    }

    /// BLEU-4 with exponential smoothing of zero-match orders. Orders with no
    /// candidate n-grams at all (candidate shorter than the order) are left out
    /// of the geometric mean.
    pub fn score(&self) -> BleuScore {
        let mut precisions = [0.0; BLEU_MAX_ORDER];
        if self.candidate_len == 0 {
            return BleuScore {
                value: 0.0,
                precisions,
                brevity_penalty: 0.0,
            };
        }
        let mut smooth = 1.0;
        let mut log_sum = 0.0;
        let mut used = 0;
        for ((p, &matched), &total) in precisions.iter_mut().zip(&self.matches).zip(&self.totals) {
            if total == 0 {
                continue;
            }
            *p = if matched == 0 {
                smooth *= 2.0;
                1.0 / (smooth * total as f64)
            } else {
                matched as f64 / total as f64
            };
            log_sum += p.ln();
            used += 1;
        }
        let brevity_penalty = if self.candidate_len >= self.reference_len {
            1.0
        } else {
            (1.0 - self.reference_len as f64 / self.candidate_len as f64).exp()
        };
        let value = 100.0 * brevity_penalty * (log_sum / used as f64).exp();
        BleuScore {
            value: value.clamp(0.0, 100.0),
            precisions,
            brevity_penalty,
        }
    }
}

fn closest_ref_len(cand_len: usize, references: &[TokenSeq]) -> usize {
    references
        .iter()
        .map(TokenSeq::len)
        .min_by_key(|&len| (len.abs_diff(cand_len), len))
        .unwrap_or(0)
}

pub fn sentence_bleu(candidate: &[String], references: &[TokenSeq]) -> Result<BleuScore> {
    Ok(BleuStats::from_sentence(candidate, references)?.score())
}

/// `100 - BLEU`: rises as the candidate shares fewer n-grams with the references.
pub fn isacrebleu(candidate: &[String], references: &[TokenSeq]) -> Result<f64> {
    Ok(100.0 - sentence_bleu(candidate, references)?.value)
}

/// Corpus BLEU: statistics are summed over all pairs before the formula is applied.
pub fn corpus_bleu<'a, I>(pairs: I) -> Result<BleuScore>
where
    I: IntoIterator<Item = (&'a [String], &'a [TokenSeq])>,
{
    let mut total = BleuStats::default();
    let mut any = false;
    for (cand, refs) in pairs {
        total += BleuStats::from_sentence(cand, refs)?;
        any = true;
    }
    if !any {
        return Err(Error::invalid("corpus BLEU over an empty corpus"));
    }
    Ok(total.score())
}

pub fn corpus_isacrebleu<'a, I>(pairs: I) -> Result<f64>
where
    I: IntoIterator<Item = (&'a [String], &'a [TokenSeq])>,
{
    Ok(100.0 - corpus_bleu(pairs)?.value)
}

/// Greedy-matching similarity between two token sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl SemanticScore {
    pub fn from_precision_recall(precision: f64, recall: f64) -> Self {
        let denom = precision + recall;
        let f1 = if denom > 0.0 {
            2.0 * precision * recall / denom
        } else {
            0.0
        };
        SemanticScore {
            precision,
            recall,
            f1,
        }
    }
}

/// Supplies one vector per token. Vectors should share a dimension and be unit norm;
/// the matcher renormalizes anyway and rejects zero vectors.
pub trait TokenEmbedder: Send + Sync {
    fn embed(&self, tokens: &[String]) -> Vec<Vec<f64>>;
}

/// Per-token importance weights.
pub trait TokenWeights: Send + Sync {
    fn weight(&self, token: &str) -> f64;
}

/// Every token weighs 1.0.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformWeights;

impl TokenWeights for UniformWeights {
    fn weight(&self, _token: &str) -> f64 {
        1.0
    }
}

fn unit_vectors(tokens: &[String], vectors: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    if vectors.len() != tokens.len() {
        return Err(Error::invalid(format!(
            "embedder returned {} vectors for {} tokens",
            vectors.len(),
            tokens.len()
        )));
    }
    tokens
        .iter()
        .zip(vectors)
        .map(|(tok, mut v)| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm <= 0.0 || !norm.is_finite() {
                return Err(Error::DegenerateEmbedding { token: tok.clone() });
            }
            v.iter_mut().for_each(|x| *x /= norm);
            Ok(v)
        })
        .collect()
}

fn weighted_max_mean(
    tokens: &[String],
    own: &[Vec<f64>],
    other: &[Vec<f64>],
    weights: &dyn TokenWeights,
) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (tok, v) in tokens.iter().zip(own) {
        let best = other
            .iter()
            .map(|u| v.iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let w = weights.weight(tok);
        num += w * best;
        den += w;
    }
    num / den
}

/// Recall averages, over source tokens, the best cosine against any candidate
/// token; precision does the same over candidate tokens. Both are weighted by
/// `weights`.
pub fn greedy_match_score(
    source: &[String],
    candidate: &[String],
    embedder: &dyn TokenEmbedder,
    weights: &dyn TokenWeights,
) -> Result<SemanticScore> {
    if source.is_empty() || candidate.is_empty() {
        return Err(Error::invalid("greedy matching needs two non-empty sequences"));
    }
    let src = unit_vectors(source, embedder.embed(source))?;
    let cand = unit_vectors(candidate, embedder.embed(candidate))?;
    let recall = weighted_max_mean(source, &src, &cand, weights);
    let precision = weighted_max_mean(candidate, &cand, &src, weights);
    Ok(SemanticScore::from_precision_recall(precision, recall))
}
