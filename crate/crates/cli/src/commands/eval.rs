use std::io::Write;

use anyhow::Result;
use parasift_core::evalkit::{evaluate, EvalOptions};
use parasift_core::EvalRecord;

use crate::config::{output_path, RunConfig};
use crate::jsonl::{open_input, open_output, read_all};
use crate::Io;

pub fn eval(io: &Io, baseline: bool, cfg: &RunConfig) -> Result<()> {
    let scorers = cfg.scorers()?;
    let (records, stats) = read_all::<EvalRecord>(open_input(output_path(&io.input))?, cfg.strict)?;
    stats.report("eval");
    let opts = EvalOptions {
        on_error: cfg.on_error,
        baseline,
    };
    let report = evaluate(records, scorers.semantic.as_ref(), scorers.fluency.as_ref(), opts)?;
    let mut out = open_output(output_path(&io.output))?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
