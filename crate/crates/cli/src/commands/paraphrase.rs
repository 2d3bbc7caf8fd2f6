//! generate, filter and their combination.

use anyhow::Result;
use parasift_core::pipeline::{self, SelectionTrace};
use parasift_core::translator::generate_all;
use parasift_core::{normalize, Candidate, ErrorPolicy, Lang, Origin, ParaphraseResult};
use serde::{Deserialize, Serialize};

use crate::config::{output_path, RunConfig};
use crate::jsonl::{open_input, open_output, process};
use crate::Io;

#[derive(Debug, Deserialize)]
struct SourceLine {
    id: String,
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CandidateLine {
    text: String,
    origin: Origin,
    #[serde(default)]
    pivot: Option<Lang>,
    #[serde(default)]
    decoder_rank: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct GeneratedLine {
    id: String,
    source: String,
    candidates: Vec<CandidateLine>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    errors: Vec<String>,
}

#[derive(Debug, Serialize)]
struct FilteredLine {
    id: String,
    source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    best: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skip_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<SelectionTrace>,
}

impl FilteredLine {
    fn skipped(id: String, source: String, reason: String) -> Self {
        FilteredLine {
            id,
            source,
            best: None,
            skip_reason: Some(reason),
            trace: None,
        }
    }

    fn from_result(r: ParaphraseResult, trace: bool) -> Self {
        let skip_reason = match (&r.best, r.trace.overlap_cands.is_empty()) {
            (Some(_), _) => None,
            (None, true) if r.trace.rejection_log.is_empty() => Some("no candidates".to_string()),
            (None, _) => Some("no admissible candidate".to_string()),
        };
        FilteredLine {
            id: r.id,
            source: r.source.into_string(),
            best: r.best.map(|b| b.into_string()),
            skip_reason,
            trace: trace.then_some(r.trace),
        }
    }
}

fn generate_line(cfg: &RunConfig, tr: &dyn parasift_core::Translator, rec: SourceLine) -> Result<GeneratedLine> {
    let source = normalize(&rec.text);
    let out = generate_all(&rec.id, &source, &cfg.generation, tr, cfg.on_error)?;
    Ok(GeneratedLine {
        id: rec.id,
        source: source.into_string(),
        candidates: out
            .set
            .candidates
            .into_iter()
            .map(|c| CandidateLine {
                text: c.text.into_string(),
                origin: c.origin,
                pivot: c.pivot,
                decoder_rank: c.decoder_rank,
            })
            .collect(),
        errors: out.errors.iter().map(|e| e.to_string()).collect(),
    })
}

/// Runs the cascade; scorer failures become skip lines unless the policy is fail-hard.
fn filter_line(cfg: &RunConfig, scorers: &parasift_core::Scorers, g: GeneratedLine) -> Result<FilteredLine> {
    let source = normalize(&g.source);
    let cands: Vec<Candidate> = g
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| Candidate {
            text: normalize(&c.text),
            origin: c.origin,
            pivot: c.pivot.clone(),
            decoder_rank: c.decoder_rank,
            generation_index: i,
        })
        .collect();
    match pipeline::run(&g.id, &source, &cands, scorers, &cfg.pipeline) {
        Ok(r) => Ok(FilteredLine::from_result(r, cfg.trace)),
        Err(e) if e.is_transport() && cfg.on_error != ErrorPolicy::Fail => {
            Ok(FilteredLine::skipped(g.id, g.source, e.to_string()))
        }
        Err(e) => Err(anyhow::Error::new(e).context(format!("record {}", g.id))),
    }
}

pub fn generate(io: &Io, cfg: &RunConfig) -> Result<()> {
    let tr = cfg.translator()?;
    let mut out = open_output(output_path(&io.output))?;
    let stats = process(open_input(output_path(&io.input))?, &mut out, cfg.strict, |_, rec: SourceLine| {
        let id = rec.id.clone();
        let line = generate_line(cfg, tr.as_ref(), rec).map_err(|e| e.context(format!("record {id}")))?;
        Ok(vec![serde_json::to_string(&line)?])
    })?;
    stats.report("source");
    Ok(())
}

pub fn filter(io: &Io, cfg: &RunConfig) -> Result<()> {
    let scorers = cfg.scorers()?;
    let mut out = open_output(output_path(&io.output))?;
    let stats = process(open_input(output_path(&io.input))?, &mut out, cfg.strict, |_, g: GeneratedLine| {
        Ok(vec![serde_json::to_string(&filter_line(cfg, &scorers, g)?)?])
    })?;
    stats.report("candidate");
    Ok(())
}

pub fn paraphrase(io: &Io, cfg: &RunConfig) -> Result<()> {
    let tr = cfg.translator()?;
    let scorers = cfg.scorers()?;
    let mut out = open_output(output_path(&io.output))?;
    let stats = process(open_input(output_path(&io.input))?, &mut out, cfg.strict, |_, rec: SourceLine| {
        let id = rec.id.clone();
        let g = generate_line(cfg, tr.as_ref(), rec).map_err(|e| e.context(format!("record {id}")))?;
        Ok(vec![serde_json::to_string(&filter_line(cfg, &scorers, g)?)?])
    })?;
    stats.report("source");
    Ok(())
}
