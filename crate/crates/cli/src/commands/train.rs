use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use parasift_core::scorers::LmParams;
use parasift_core::{normalize, NGramLanguageModel};

use crate::config::config_err;

pub fn train_lm(corpus: &Path, output: &Path, lambdas: Option<Vec<f64>>, add_k: Option<f64>) -> Result<()> {
    let mut params = LmParams::default();
    if let Some(l) = lambdas {
        params.lambdas = [l[0], l[1], l[2]];
    }
    if let Some(k) = add_k {
        params.add_k = k;
    }
    params.validate().map_err(|e| config_err(e.to_string()))?;

    let file = File::open(corpus).with_context(|| format!("cannot open corpus {}", corpus.display()))?;
    let lines = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .with_context(|| format!("reading {}", corpus.display()))?;
    let lm = NGramLanguageModel::train(lines.iter().map(|l| normalize(l)), params)?;
    let mut out = BufWriter::new(File::create(output).with_context(|| format!("cannot create {}", output.display()))?);
    lm.write_to(&mut out)?;
    out.flush()?;
    eprintln!("trained on {} lines, vocabulary {}", lines.len(), lm.vocab_len());
    Ok(())
}
