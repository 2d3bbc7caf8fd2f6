//! augment and subsample over JSONL or CSV datasets.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use parasift_core::augment::{subsample as balance, AugmentConfig};
use parasift_core::{Augmenter, LabeledExample};

use crate::config::{output_path, RunConfig};
use crate::jsonl::{open_input, open_output, read_all};
use crate::Io;

fn is_csv(path: Option<&Path>) -> bool {
    path.and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// CSV needs a header with at least `id`, `text` and `label`.
fn read_dataset(path: Option<&Path>, strict: bool) -> Result<Vec<LabeledExample>> {
    if !is_csv(path) {
        let (rows, stats) = read_all(open_input(path)?, strict)?;
        stats.report("example");
        return Ok(rows);
    }
    let mut reader = csv::Reader::from_reader(open_input(path)?);
    let mut rows = Vec::new();
    let mut invalid = 0;
    for (i, rec) in reader.deserialize::<LabeledExample>().enumerate() {
        match rec {
            Ok(mut ex) => {
                // csv yields Some("") for an empty trailing column
                ex.augmented_from = ex.augmented_from.filter(|s| !s.is_empty());
                rows.push(ex);
            }
            Err(e) => {
                // line 1 is the header
                eprintln!("line {}: invalid record: {e}", i + 2);
                if strict {
                    anyhow::bail!("aborting on invalid input at line {} (--strict)", i + 2);
                }
                invalid += 1;
            }
        }
    }
    if invalid > 0 {
        eprintln!("skipped {invalid} invalid example line(s)");
    }
    Ok(rows)
}

fn write_rows<'a>(path: Option<&Path>, rows: impl Iterator<Item = &'a LabeledExample>) -> Result<()> {
    let mut out = open_output(path)?;
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn augment(
    io: &Io,
    multiplicity: usize,
    paraphrase_augmented: bool,
    stats_path: Option<&Path>,
    cfg: &RunConfig,
) -> Result<()> {
    let tr = cfg.translator()?;
    let scorers = cfg.scorers()?;
    let data = read_dataset(output_path(&io.input), cfg.strict)?;
    let mut acfg = AugmentConfig::new(cfg.generation.clone(), cfg.pipeline);
    acfg.multiplicity = multiplicity;
    acfg.paraphrase_augmented = paraphrase_augmented;
    // same policy as every other subcommand: endpoint failures abort unless skip/fallback
    acfg.on_error = cfg.on_error;
    let aug = Augmenter::new(tr.as_ref(), scorers, acfg)?;
    let out = aug.augment(data)?;
    write_rows(output_path(&io.output), out.rows())?;
    let s = &out.stats;
    eprintln!(
        "{} original(s), {} generated, {} skipped, {} passed through",
        out.originals.len(),
        s.generated,
        s.skip_count,
        s.passthrough
    );
    if let Some(p) = stats_path {
        let f = std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
        serde_json::to_writer_pretty(f, s)?;
    }
    Ok(())
}

pub fn subsample(io: &Io, keep_fraction: Option<f64>, cfg: &RunConfig) -> Result<()> {
    let data = read_dataset(output_path(&io.input), cfg.strict)?;
    let kept = balance(&data, keep_fraction, cfg.seed)?;
    eprintln!("kept {} of {} example(s)", kept.len(), data.len());
    write_rows(output_path(&io.output), kept.iter())
}
