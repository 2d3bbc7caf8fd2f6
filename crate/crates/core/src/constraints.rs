//! Post-hoc checks for the decoder blocking restrictions.
//!
//! Two rules are enforced on every candidate:
//!
//! 1. The candidate may not copy a contiguous run of source tokens longer than
//!    `floor(len(source) * max_source_overlap_ratio)`. Sources of at most
//!    `short_source_token_threshold` tokens use the fixed bound
//!    `short_source_overlap_ngram` instead.
//! 2. No n-gram of order `no_repeat_ngram` may occur twice in the candidate.
//!
//! The same values are forwarded to translators as request hints, but remote
//! decoders are not trusted to honor them.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::textkit::longest_contiguous_overlap;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintConfig {
    pub max_source_overlap_ratio: f64,
    pub no_repeat_ngram: usize,
    pub short_source_token_threshold: usize,
    pub short_source_overlap_ngram: usize,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        ConstraintConfig {
            max_source_overlap_ratio: 0.5,
            no_repeat_ngram: 3,
            short_source_token_threshold: 6,
            short_source_overlap_ngram: 2,
        }
    }
}

impl ConstraintConfig {
    pub fn validate(&self) -> Result<()> {
        let r = self.max_source_overlap_ratio;
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::invalid(format!(
                "max_source_overlap_ratio must be in (0, 1], got {r}"
            )));
        }
        if self.no_repeat_ngram == 0
            || self.short_source_token_threshold == 0
            || self.short_source_overlap_ngram == 0
        {
            return Err(Error::invalid("constraint sizes must be positive"));
        }
        Ok(())
    }
}

/// A [`ConstraintConfig`] resolved against a particular source length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveConstraints {
    /// Longest contiguous source run a candidate may copy.
    pub overlap_bound: usize,
    pub no_repeat_ngram: usize,
    pub short_source: bool,
}

pub fn effective_config(source_len: usize, cfg: &ConstraintConfig) -> EffectiveConstraints {
    let short_source = source_len <= cfg.short_source_token_threshold;
    let overlap_bound = if short_source {
        cfg.short_source_overlap_ngram
    } else {
        // epsilon keeps ratios like 1/3 from flooring one short
        (source_len as f64 * cfg.max_source_overlap_ratio + 1e-9).floor() as usize
    };
    EffectiveConstraints {
        overlap_bound,
        no_repeat_ngram: cfg.no_repeat_ngram,
        short_source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub source_overlap_violation: bool,
    pub repeated_ngram_violation: bool,
    pub overlap_run_length: usize,
}

impl ConstraintReport {
    pub fn passes(&self) -> bool {
        !self.source_overlap_violation && !self.repeated_ngram_violation
    }
}

/// Restriction (1) only; `repeated_ngram_violation` is left false.
pub fn check_source_overlap(
    source: &[String],
    candidate: &[String],
    cfg: &ConstraintConfig,
) -> Result<ConstraintReport> {
    if source.is_empty() {
        return Err(Error::invalid("source overlap check needs a non-empty source"));
    }
    let bound = effective_config(source.len(), cfg).overlap_bound;
    let run = longest_contiguous_overlap(source, candidate);
    Ok(ConstraintReport {
        source_overlap_violation: run > bound,
        repeated_ngram_violation: false,
        overlap_run_length: run,
    })
}

/// True when some n-gram occurs at least twice.
pub fn check_repeated_ngram(candidate: &[String], n: usize) -> bool {
    if n == 0 {
        return false;
    }
    let mut seen = HashSet::new();
    candidate.windows(n).any(|gram| !seen.insert(gram))
}

/// Both restrictions.
pub fn check(
    source: &[String],
    candidate: &[String],
    cfg: &ConstraintConfig,
) -> Result<ConstraintReport> {
    let mut report = check_source_overlap(source, candidate, cfg)?;
    report.repeated_ngram_violation = check_repeated_ngram(candidate, cfg.no_repeat_ngram);
    Ok(report)
}
