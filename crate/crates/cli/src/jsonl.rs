//! Line-oriented JSON input and output.
//!
//! Records are read in chunks, processed in parallel and written back in input
//! order. Lines that fail to parse are reported with their line number and then
//! skipped, or abort the run under `--strict`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::de::DeserializeOwned;

pub const CHUNK_LINES: usize = 256;

pub fn open_input(path: Option<&Path>) -> Result<Box<dyn BufRead>> {
    match path {
        None => Ok(Box::new(BufReader::new(io::stdin()))),
        Some(p) => {
            let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            Ok(Box::new(BufReader::new(f)))
        }
    }
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct LineStats {
    pub records: usize,
    pub invalid: usize,
}

impl LineStats {
    pub fn report(&self, what: &str) {
        if self.invalid > 0 {
            eprintln!("skipped {} invalid {what} line(s)", self.invalid);
        }
    }
}

struct Lines<R> {
    reader: R,
    line_no: usize,
    strict: bool,
    stats: LineStats,
}

impl<R: BufRead> Lines<R> {
    /// Up to `max` parsed records with their 1-based line numbers.
    fn next_chunk<T: DeserializeOwned>(&mut self, max: usize) -> Result<Vec<(usize, T)>> {
        let mut out = Vec::new();
        let mut buf = String::new();
        while out.len() < max {
            buf.clear();
            if self.reader.read_line(&mut buf).context("reading input")? == 0 {
                break;
            }
            self.line_no += 1;
            let line = buf.trim();
            if line.is_empty() {
                continue;
            }
            match serde_json::from_str::<T>(line) {
                Ok(rec) => {
                    self.stats.records += 1;
                    out.push((self.line_no, rec));
                }
                Err(e) => {
                    eprintln!("line {}: invalid record: {e}", self.line_no);
                    if self.strict {
                        bail!("aborting on invalid input at line {} (--strict)", self.line_no);
                    }
                    self.stats.invalid += 1;
                }
            }
        }
        Ok(out)
    }
}

/// Streams records through `f`; each call yields zero or more output lines.
pub fn process<T, F>(input: impl BufRead, output: &mut dyn Write, strict: bool, f: F) -> Result<LineStats>
where
    T: DeserializeOwned + Send,
    F: Fn(usize, T) -> Result<Vec<String>> + Sync,
{
    let mut lines = Lines {
        reader: input,
        line_no: 0,
        strict,
        stats: LineStats::default(),
    };
    loop {
        let chunk = lines.next_chunk::<T>(CHUNK_LINES)?;
        if chunk.is_empty() {
            break;
        }
        let results: Vec<Result<Vec<String>>> = chunk.into_par_iter().map(|(n, rec)| f(n, rec)).collect();
        for r in results {
            for line in r? {
                writeln!(output, "{line}")?;
            }
        }
    }
    output.flush()?;
    Ok(lines.stats)
}

/// Reads every record into memory.
pub fn read_all<T: DeserializeOwned>(input: impl BufRead, strict: bool) -> Result<(Vec<T>, LineStats)> {
    let mut lines = Lines {
        reader: input,
        line_no: 0,
        strict,
        stats: LineStats::default(),
    };
    let mut out = Vec::new();
    loop {
        let chunk = lines.next_chunk::<T>(CHUNK_LINES)?;
        if chunk.is_empty() {
            break;
        }
        out.extend(chunk.into_iter().map(|(_, r)| r));
    }
    Ok((out, lines.stats))
}
