//! Corpus evaluation with three columns: semantic similarity to gold
//! references, diversity as corpus isacrebleu against the source, and mean
//! perplexity.
//!
//! The semantic column comes from whichever [`SemanticScorer`] is plugged in; it
//! is not Bleurt and the report's provenance says so.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::metrics::{corpus_isacrebleu, isacrebleu};
use crate::scorers::{FluencyScorer, SemanticScorer};
use crate::textkit::{normalize, tokenize, NormalizedText, TokenSeq};
use crate::{Error, ErrorPolicy, Result};

/// One line of an evaluation file:
/// `{"id", "source", "output", "references": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub source: NormalizedText,
    #[serde(rename = "output")]
    pub system_output: NormalizedText,
    #[serde(default)]
    pub references: Vec<NormalizedText>,
}

impl EvalRecord {
    pub fn new(id: &str, source: &str, output: &str, references: &[&str]) -> Self {
        EvalRecord {
            id: id.into(),
            source: normalize(source),
            system_output: normalize(output),
            references: references.iter().map(|r| normalize(r)).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if tokenize(&self.source).is_empty() || tokenize(&self.system_output).is_empty() {
            return Err(Error::invalid(format!("record {}: empty source or output", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub semantic_mean: f64,
    /// Corpus-level `100 - BLEU` of outputs against their sources.
    pub diversity_corpus: f64,
    /// Mean of sentence-level isacrebleu, for comparison.
    pub diversity_sentence_mean: f64,
    pub fluency_mean_ppl: f64,
    pub count: usize,
    pub excluded: Vec<String>,
    pub scorer_provenance: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub on_error: ErrorPolicy,
    /// Score the source itself as the system output.
    pub baseline: bool,
}

/// Neumaier compensated sum, accumulated in input order.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

struct Scored {
    semantic: f64,
    ppl: f64,
    against_gold: bool,
}

fn score_record(
    rec: &EvalRecord,
    semantic: &dyn SemanticScorer,
    fluency: &dyn FluencyScorer,
) -> Result<Scored> {
    let output = std::slice::from_ref(&rec.system_output);
    let against_gold = !rec.references.is_empty();
    // best match over the gold references
    let semantic_score = if against_gold {
        let mut best = f64::NEG_INFINITY;
        for r in &rec.references {
            let s = semantic.score_semantic(r, output)?;
            best = best.max(s.first().ok_or_else(|| Error::invalid("semantic scorer returned nothing"))?.f1);
        }
        best
    } else {
        semantic
            .score_semantic(&rec.source, output)?
            .first()
            .ok_or_else(|| Error::invalid("semantic scorer returned nothing"))?
            .f1
    };
    let ppl = fluency
        .score_fluency(output)?
        .first()
        .ok_or_else(|| Error::invalid("fluency scorer returned nothing"))?
        .ppl;
    Ok(Scored {
        semantic: semantic_score,
        ppl,
        against_gold,
    })
}

pub fn evaluate<I>(
    records: I,
    semantic: &dyn SemanticScorer,
    fluency: &dyn FluencyScorer,
    opts: EvalOptions,
) -> Result<EvalReport>
where
    I: IntoIterator<Item = EvalRecord>,
{
    let mut sem = CompensatedSum::default();
    let mut ppl = CompensatedSum::default();
    let mut sent_div = CompensatedSum::default();
    let mut pairs: Vec<(TokenSeq, [TokenSeq; 1])> = Vec::new();
    let mut excluded = Vec::new();
    let (mut gold, mut fallback_to_source, mut seen) = (0usize, 0usize, 0usize);

    for mut rec in records {
        seen += 1;
        if opts.baseline {
            rec.system_output = rec.source.clone();
        }
        rec.validate()?;
        let scored = match score_record(&rec, semantic, fluency) {
            Ok(s) => s,
            Err(e) if opts.on_error != ErrorPolicy::Fail && e.is_transport() => {
                excluded.push(rec.id.clone());
                continue;
            }
            Err(e) => return Err(e),
        };
        sem.add(scored.semantic);
        ppl.add(scored.ppl);
        if scored.against_gold {
            gold += 1;
        } else {
            fallback_to_source += 1;
        }
        let out = tokenize(&rec.system_output);
        let src = [tokenize(&rec.source)];
        sent_div.add(isacrebleu(&out, &src)?);
        pairs.push((out, src));
    }
    if seen == 0 {
        return Err(Error::invalid("evaluation needs at least one record"));
    }
    let count = pairs.len();
    if count == 0 {
        return Err(Error::invalid("every record was excluded"));
    }
    let diversity_corpus = corpus_isacrebleu(pairs.iter().map(|(o, s)| (o.tokens(), &s[..])))?;

    let mut prov = BTreeMap::new();
    prov.insert("semantic".into(), format!("{} (greedy-match f1; not Bleurt)", semantic.label()));
    prov.insert(
        "semantic_reference".into(),
        match (gold, fallback_to_source) {
            (_, 0) => "gold".to_string(),
            (0, _) => "source".to_string(),
            (g, s) => format!("mixed: {g} gold, {s} source"),
        },
    );
    prov.insert("diversity".into(), "corpus isacrebleu vs source (100 - BLEU-4, exp smoothing)".into());
    prov.insert("fluency".into(), format!("{} (mean perplexity)", fluency.label()));
    if opts.baseline {
        prov.insert("mode".into(), "baseline: output := source".into());
    }

    let n = count as f64;
    Ok(EvalReport {
        semantic_mean: sem.total() / n,
        diversity_corpus,
        diversity_sentence_mean: sent_div.total() / n,
        fluency_mean_ppl: ppl.total() / n,
        count,
        excluded,
        scorer_provenance: prov,
    })
}
