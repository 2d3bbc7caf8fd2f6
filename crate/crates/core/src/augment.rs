//! Label-preserving data augmentation.
//!
//! Every example is paraphrased through generation plus the selection cascade.
//! Originals are always kept; each successful example contributes one generated
//! row (or up to `multiplicity` rows) that copies its label and records the
//! original id in `augmented_from`. Rows that already carry `augmented_from` are
//! passed through untouched unless `paraphrase_augmented` is set, so running the
//! tool twice does not chain paraphrases.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pipeline::{self, PipelineConfig, Scorers};
use crate::textkit::{normalize, tokenize};
use crate::translator::{generate_all, GenerationConfig, Translator};
use crate::{Error, ErrorPolicy, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmented_from: Option<String>,
}

impl LabeledExample {
    pub fn new(id: &str, text: &str, label: &str) -> Self {
        LabeledExample {
            id: id.into(),
            text: text.into(),
            label: label.into(),
            augmented_from: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    pub generation: GenerationConfig,
    pub pipeline: PipelineConfig,
    /// Paraphrases per example; values above 1 take the next-best survivors of
    /// the fluency stage in semantic order.
    pub multiplicity: usize,
    pub paraphrase_augmented: bool,
    /// Per-example failure handling. `Skip` unless changed.
    pub on_error: ErrorPolicy,
}

impl AugmentConfig {
    pub fn new(generation: GenerationConfig, pipeline: PipelineConfig) -> Self {
        AugmentConfig {
            generation,
            pipeline,
            multiplicity: 1,
            paraphrase_augmented: false,
            on_error: ErrorPolicy::Skip,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AugmentStats {
    pub label_counts_before: BTreeMap<String, usize>,
    pub label_counts_after: BTreeMap<String, usize>,
    pub generated: usize,
    pub skip_count: usize,
    pub skipped: Vec<Skip>,
    /// Rows already carrying `augmented_from`, kept but not paraphrased.
    pub passthrough: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentedDataset {
    pub originals: Vec<LabeledExample>,
    pub generated: Vec<LabeledExample>,
    pub stats: AugmentStats,
}

impl AugmentedDataset {
    /// Originals in input order, then generated rows in input order.
    pub fn rows(&self) -> impl Iterator<Item = &LabeledExample> {
        self.originals.iter().chain(&self.generated)
    }
}

enum Outcome {
    Generated(Vec<LabeledExample>),
    Skipped(String),
    Passthrough,
}

pub struct Augmenter<'a> {
    translator: &'a dyn Translator,
    scorers: Scorers,
    cfg: AugmentConfig,
}

impl<'a> Augmenter<'a> {
    pub fn new(translator: &'a dyn Translator, scorers: Scorers, cfg: AugmentConfig) -> Result<Self> {
        cfg.generation.validate()?;
        if cfg.multiplicity == 0 {
            return Err(Error::invalid("multiplicity must be at least 1"));
        }
        Ok(Augmenter {
            translator,
            scorers,
            cfg,
        })
    }

    fn paraphrase(&self, ex: &LabeledExample) -> Result<Outcome> {
        if ex.augmented_from.is_some() && !self.cfg.paraphrase_augmented {
            return Ok(Outcome::Passthrough);
        }
        let source = normalize(&ex.text);
        let generated = generate_all(&ex.id, &source, &self.cfg.generation, self.translator, self.cfg.on_error)?;
        let result = pipeline::run_set(&generated.set, &self.scorers, &self.cfg.pipeline)?;
        let Some(best) = result.trace.best.clone() else {
            let reason = if generated.errors.is_empty() {
                "no admissible candidate".to_string()
            } else {
                format!("no admissible candidate ({} generation errors)", generated.errors.len())
            };
            return Ok(Outcome::Skipped(reason));
        };
        let mut ranked: Vec<_> = result
            .trace
            .semantic_scores
            .iter()
            .filter(|s| s.candidate.generation_index != best.generation_index)
            .collect();
        ranked.sort_by(|a, b| {
            b.score
                .f1
                .total_cmp(&a.score.f1)
                .then(a.candidate.generation_index.cmp(&b.candidate.generation_index))
        });
        let texts = std::iter::once(&best)
            .chain(ranked.into_iter().map(|s| &s.candidate))
            .take(self.cfg.multiplicity);
        Ok(Outcome::Generated(
            texts
                .enumerate()
                .map(|(k, c)| LabeledExample {
                    id: format!("{}-para{}", ex.id, k + 1),
                    text: c.text.as_str().to_owned(),
                    label: ex.label.clone(),
                    augmented_from: Some(ex.id.clone()),
                })
                .collect(),
        ))
    }

    pub fn augment(&self, dataset: Vec<LabeledExample>) -> Result<AugmentedDataset> {
        if dataset.is_empty() {
            return Err(Error::invalid("augmentation needs at least one example"));
        }
        let mut ids = HashSet::new();
        for ex in &dataset {
            if !ids.insert(ex.id.as_str()) {
                return Err(Error::invalid(format!("duplicate example id {:?}", ex.id)));
            }
            if tokenize(&normalize(&ex.text)).is_empty() {
                return Err(Error::invalid(format!("example {:?} has empty text", ex.id)));
            }
        }

        let outcomes: Vec<Result<Outcome>> = dataset.par_iter().map(|ex| self.paraphrase(ex)).collect();
        let mut out = AugmentedDataset::default();
        for (ex, outcome) in dataset.iter().zip(outcomes) {
            *out.stats.label_counts_before.entry(ex.label.clone()).or_insert(0) += 1;
            match outcome {
                Ok(Outcome::Generated(rows)) => out.generated.extend(rows),
                Ok(Outcome::Passthrough) => out.stats.passthrough += 1,
                Ok(Outcome::Skipped(reason)) => out.stats.skipped.push(Skip {
                    id: ex.id.clone(),
                    reason,
                }),
                Err(e) if self.cfg.on_error == ErrorPolicy::Fail => return Err(e),
                Err(e) => out.stats.skipped.push(Skip {
                    id: ex.id.clone(),
                    reason: e.to_string(),
                }),
            }
        }
        out.originals = dataset;
        out.stats.skip_count = out.stats.skipped.len();
        out.stats.generated = out.generated.len();
        out.stats.label_counts_after = out.stats.label_counts_before.clone();
        for g in &out.generated {
            *out.stats.label_counts_after.entry(g.label.clone()).or_insert(0) += 1;
        }
        Ok(out)
    }
}

/// Down-samples every label to the minority count, then optionally keeps only
/// `keep_fraction` of each label. Kept rows retain input order.
pub fn subsample(examples: &[LabeledExample], keep_fraction: Option<f64>, seed: u64) -> Result<Vec<LabeledExample>> {
    if let Some(f) = keep_fraction {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::invalid(format!("keep fraction must be in (0, 1], got {f}")));
        }
    }
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, ex) in examples.iter().enumerate() {
        by_label.entry(ex.label.as_str()).or_default().push(i);
    }
    let Some(minority) = by_label.values().map(Vec::len).min() else {
        return Ok(Vec::new());
    };
    let per_label = match keep_fraction {
        Some(f) => (minority as f64 * f).floor() as usize,
        None => minority,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::new();
    for idx in by_label.values_mut() {
        idx.shuffle(&mut rng);
        keep.extend_from_slice(&idx[..per_label]);
    }
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| examples[i].clone()).collect())
}
