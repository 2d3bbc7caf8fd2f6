//! Candidate generation.
//!
//! Two routes produce candidates. Direct decoding asks the translator for a
//! same-language rewrite (`src == tgt`) and keeps the top few beam hypotheses.
//! Round-trip decoding translates into a pivot language and back, once per
//! language in the pivot pool. Decoder restrictions are sent as hints only; the
//! pipeline re-checks them.

mod mock;
mod protocol;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintConfig;
use crate::textkit::{normalize, NormalizedText};
use crate::{CallLeg, Error, ErrorPolicy, Result};

pub use mock::{MockTables, MockTranslator, PairTable, Reorder, Variant};
pub use protocol::{HttpTranslator, Hypothesis, TranslateRequest, TranslateResponse, Translator};

/// Language code such as `en` or `zh`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Lang(String);

impl Lang {
    pub fn new(code: &str) -> Result<Self> {
        let code = code.trim().to_ascii_lowercase();
        let ok = !code.is_empty()
            && code.len() <= 16
            && code.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !ok {
            return Err(Error::invalid(format!("bad language code {code:?}")));
        }
        Ok(Lang(code))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Lang {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Lang::new(&s)
    }
}

impl From<Lang> for String {
    fn from(l: Lang) -> String {
        l.0
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub const DEFAULT_POOL: [&str; 7] = ["en", "ko", "fr", "ja", "zh", "de", "es"];

/// Parses a comma-separated list of language codes.
pub fn parse_pool(csv: &str) -> Result<Vec<Lang>> {
    csv.split(',').filter(|s| !s.trim().is_empty()).map(Lang::new).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub source_lang: Lang,
    pub pivot_pool: Vec<Lang>,
    pub direct_beam: usize,
    pub direct_topk: usize,
    pub roundtrip_beam: usize,
    pub roundtrip_topk: usize,
    pub constraints: ConstraintConfig,
}

impl GenerationConfig {
    /// Beam 10 / top 5 for direct decoding, beam 3 / top 1 for each round trip,
    /// and the seven-language pool minus the source language.
    pub fn new(source_lang: Lang) -> Self {
        let pivot_pool = DEFAULT_POOL
            .iter()
            .filter(|&&c| c != source_lang.as_str())
            .map(|c| Lang(c.to_string()))
            .collect();
        GenerationConfig {
            source_lang,
            pivot_pool,
            direct_beam: 10,
            direct_topk: 5,
            roundtrip_beam: 3,
            roundtrip_topk: 1,
            constraints: ConstraintConfig::default(),
        }
    }

    pub fn with_pool(mut self, pool: Vec<Lang>) -> Self {
        self.pivot_pool = pool;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.direct_topk == 0 || self.roundtrip_topk == 0 {
            return Err(Error::invalid("top-k sizes must be positive"));
        }
        if self.direct_topk > self.direct_beam {
            return Err(Error::invalid("direct_topk exceeds direct_beam"));
        }
        if self.roundtrip_topk > self.roundtrip_beam {
            return Err(Error::invalid("roundtrip_topk exceeds roundtrip_beam"));
        }
        if self.pivot_pool.contains(&self.source_lang) {
            return Err(Error::invalid(format!(
                "pivot pool contains the source language {}",
                self.source_lang
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.pivot_pool.iter().find(|l| !seen.insert(*l)) {
            return Err(Error::invalid(format!("pivot {dup} listed twice")));
        }
        self.constraints.validate()
    }

    fn request(&self, src: &Lang, tgt: &Lang, text: &str, beam: usize, num_return: usize) -> TranslateRequest {
        TranslateRequest {
            src_lang: src.to_string(),
            tgt_lang: tgt.to_string(),
            texts: vec![text.to_owned()],
            beam_size: beam,
            num_return,
            no_repeat_ngram: self.constraints.no_repeat_ngram,
            block_source_overlap_ratio: Some(self.constraints.max_source_overlap_ratio),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Direct,
    Roundtrip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub text: NormalizedText,
    pub origin: Origin,
    /// Present exactly for round-trip candidates.
    pub pivot: Option<Lang>,
    pub decoder_rank: usize,
    /// Arrival order within its set; unique.
    pub generation_index: usize,
}

impl Candidate {
    pub fn direct(text: &str, decoder_rank: usize, generation_index: usize) -> Self {
        Candidate {
            text: normalize(text),
            origin: Origin::Direct,
            pivot: None,
            decoder_rank,
            generation_index,
        }
    }

    pub fn roundtrip(text: &str, pivot: Lang, decoder_rank: usize, generation_index: usize) -> Self {
        Candidate {
            text: normalize(text),
            origin: Origin::Roundtrip,
            pivot: Some(pivot),
            decoder_rank,
            generation_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub id: String,
    pub source: NormalizedText,
    pub source_lang: Lang,
    pub candidates: Vec<Candidate>,
}

/// A generated set together with the calls that failed under a non-failing policy.
#[derive(Debug)]
pub struct GenerationOutcome {
    pub set: CandidateSet,
    pub errors: Vec<Error>,
}

fn call(
    translator: &dyn Translator,
    req: &TranslateRequest,
    leg: CallLeg,
) -> Result<Vec<Hypothesis>> {
    let fail = |message: String| Error::Translator {
        src: req.src_lang.clone(),
        tgt: req.tgt_lang.clone(),
        leg,
        message,
    };
    let resp = translator.translate(req).map_err(|e| fail(e.to_string()))?;
    resp.validate(req).map_err(fail)?;
    Ok(resp.results.into_iter().next().unwrap_or_default())
}

/// One same-language request; up to `direct_topk` candidates, ranked.
pub fn generate_direct(
    source: &NormalizedText,
    cfg: &GenerationConfig,
    translator: &dyn Translator,
) -> Result<Vec<Candidate>> {
    if source.is_empty() {
        return Err(Error::invalid("cannot generate from an empty source"));
    }
    let lang = &cfg.source_lang;
    let req = cfg.request(lang, lang, source.as_str(), cfg.direct_beam, cfg.direct_topk);
    let hyps = call(translator, &req, CallLeg::Direct)?;
    Ok(hyps
        .iter()
        .enumerate()
        .map(|(rank, h)| Candidate::direct(&h.text, rank, 0))
        .collect())
}

/// Source to `pivot` (best hypothesis only) and back. Empty when either leg
/// produces nothing.
pub fn generate_roundtrip(
    source: &NormalizedText,
    pivot: &Lang,
    cfg: &GenerationConfig,
    translator: &dyn Translator,
) -> Result<Vec<Candidate>> {
    if source.is_empty() {
        return Err(Error::invalid("cannot generate from an empty source"));
    }
    if *pivot == cfg.source_lang {
        return Err(Error::invalid("pivot equals the source language"));
    }
    let fwd = cfg.request(&cfg.source_lang, pivot, source.as_str(), cfg.roundtrip_beam, 1);
    let Some(mid) = call(translator, &fwd, CallLeg::Forward)?.into_iter().next() else {
        return Ok(Vec::new());
    };
    let back = cfg.request(pivot, &cfg.source_lang, &mid.text, cfg.roundtrip_beam, cfg.roundtrip_topk);
    let hyps = call(translator, &back, CallLeg::Backward)?;
    Ok(hyps
        .iter()
        .enumerate()
        .map(|(rank, h)| Candidate::roundtrip(&h.text, pivot.clone(), rank, 0))
        .collect())
}

/// Direct candidates first, then round trips in pool order. Generation indices
/// follow that order regardless of which calls finish first.
pub fn generate_all(
    id: &str,
    source: &NormalizedText,
    cfg: &GenerationConfig,
    translator: &dyn Translator,
    policy: ErrorPolicy,
) -> Result<GenerationOutcome> {
    cfg.validate()?;
    if source.is_empty() {
        return Err(Error::invalid("cannot generate from an empty source"));
    }
    let (direct, trips) = rayon::join(
        || generate_direct(source, cfg, translator),
        || {
            cfg.pivot_pool
                .par_iter()
                .map(|p| generate_roundtrip(source, p, cfg, translator))
                .collect::<Vec<_>>()
        },
    );

    let mut candidates = Vec::new();
    let mut errors = Vec::new();
    for batch in std::iter::once(direct).chain(trips) {
        match batch {
            Ok(cands) => candidates.extend(cands),
            Err(e) if policy == ErrorPolicy::Fail => return Err(e),
            Err(e) => errors.push(e),
        }
    }
    for (i, c) in candidates.iter_mut().enumerate() {
        c.generation_index = i;
    }
    Ok(GenerationOutcome {
        set: CandidateSet {
            id: id.to_owned(),
            source: source.clone(),
            source_lang: cfg.source_lang.clone(),
            candidates,
        },
        errors,
    })
}
