//! Interpolated trigram language model with an add-k unigram floor.
//!
//! `p(w | u, v) = l3 * p3(w | u, v) + l2 * p2(w | v) + l1 * p1(w)`
//!
//! `p1` is add-k smoothed over the vocabulary plus `<unk>` and `</s>`; `p2` and
//! `p3` are maximum likelihood. When a context was never observed its weight is
//! handed to the remaining orders in proportion to their own weights, so every
//! conditional distribution sums to one.

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use crate::textkit::{tokenize, NormalizedText};
use crate::{Error, Result};

use super::FluencyScore;

pub type TokenId = u32;

pub const UNK: TokenId = 0;
pub const BOS: TokenId = 1;
pub const EOS: TokenId = 2;

const RESERVED: [&str; 3] = ["<unk>", "<s>", "</s>"];
const MAGIC: &str = "parasift-lm";
const FORMAT_VERSION: u32 = 1;

/// Tokens seen fewer times than this in training become `<unk>`.
pub const MIN_TOKEN_FREQ: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmParams {
    /// Weights for the trigram, bigram, and unigram estimates.
    pub lambdas: [f64; 3],
    pub add_k: f64,
}

impl Default for LmParams {
    fn default() -> Self {
        LmParams {
            lambdas: [0.6, 0.3, 0.1],
            add_k: 1.0,
        }
    }
}

impl LmParams {
    pub fn validate(&self) -> Result<()> {
        if self.lambdas.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return Err(Error::invalid("interpolation weights must be positive"));
        }
        let sum: f64 = self.lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("interpolation weights sum to {sum}, not 1")));
        }
        if self.add_k <= 0.0 || !self.add_k.is_finite() {
            return Err(Error::invalid("add_k must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramLanguageModel {
    params: LmParams,
    vocab: Vec<String>,
    index: HashMap<String, TokenId>,
    unigrams: HashMap<TokenId, u64>,
    bigrams: HashMap<(TokenId, TokenId), u64>,
    trigrams: HashMap<(TokenId, TokenId, TokenId), u64>,
    bigram_ctx: HashMap<TokenId, u64>,
    trigram_ctx: HashMap<(TokenId, TokenId), u64>,
    event_total: u64,
}

impl NGramLanguageModel {
    pub const ORDER: usize = 3;

    /// Trains on normalized sentences. Empty sentences are ignored; at least one
    /// non-empty sentence is required.
    pub fn train<I>(corpus: I, params: LmParams) -> Result<Self>
    where
        I: IntoIterator<Item = NormalizedText>,
    {
        params.validate()?;
        let sentences: Vec<Vec<String>> = corpus
            .into_iter()
            .map(|s| tokenize(&s).tokens().to_vec())
            .filter(|t| !t.is_empty())
            .collect();
        if sentences.is_empty() {
            return Err(Error::invalid("language model corpus has no non-empty sentence"));
        }

        let mut freq: HashMap<&str, u64> = HashMap::new();
        for tok in sentences.iter().flatten() {
            *freq.entry(tok.as_str()).or_insert(0) += 1;
        }
        let mut kept: Vec<&str> = freq
            .iter()
            .filter(|&(tok, &c)| c >= MIN_TOKEN_FREQ && !RESERVED.contains(tok))
            .map(|(&tok, _)| tok)
            .collect();
        kept.sort_unstable();

        let mut vocab: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        vocab.extend(kept.into_iter().map(str::to_owned));
        let mut lm = Self::empty(params, vocab);
        for sent in &sentences {
            let ids: Vec<TokenId> = sent.iter().map(|t| lm.id(t)).collect();
            lm.add_sentence(&ids);
        }
        Ok(lm)
    }

    fn empty(params: LmParams, vocab: Vec<String>) -> Self {
        let index = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        NGramLanguageModel {
            params,
            vocab,
            index,
            unigrams: HashMap::new(),
            bigrams: HashMap::new(),
            trigrams: HashMap::new(),
            bigram_ctx: HashMap::new(),
            trigram_ctx: HashMap::new(),
            event_total: 0,
        }
    }

    fn add_sentence(&mut self, ids: &[TokenId]) {
        let (mut u, mut v) = (BOS, BOS);
        for &w in ids.iter().chain(std::iter::once(&EOS)) {
            self.add_event(u, v, w, 1);
            u = v;
            v = w;
        }
    }

    fn add_event(&mut self, u: TokenId, v: TokenId, w: TokenId, count: u64) {
        *self.unigrams.entry(w).or_insert(0) += count;
        *self.bigrams.entry((v, w)).or_insert(0) += count;
        *self.trigrams.entry((u, v, w)).or_insert(0) += count;
        *self.bigram_ctx.entry(v).or_insert(0) += count;
        *self.trigram_ctx.entry((u, v)).or_insert(0) += count;
        self.event_total += count;
    }

    pub fn params(&self) -> LmParams {
        self.params
    }

    /// Vocabulary size including the three reserved symbols.
    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.vocab[id as usize]
    }

    /// Maps a token to its id; unknown tokens map to `<unk>`.
    pub fn id(&self, token: &str) -> TokenId {
        match self.index.get(token) {
            Some(&id) if id != BOS && id != EOS => id,
            _ => UNK,
        }
    }

    /// Ids that can be predicted: the vocabulary minus `<s>`.
    pub fn event_space(&self) -> impl Iterator<Item = TokenId> + '_ {
        (0..self.vocab.len() as TokenId).filter(|&id| id != BOS)
    }

    /// Contexts `(u, v)` observed in training.
    pub fn observed_contexts(&self) -> impl Iterator<Item = (TokenId, TokenId)> + '_ {
        self.trigram_ctx.keys().copied()
    }

    fn unigram_prob(&self, w: TokenId) -> f64 {
        let events = (self.vocab.len() - 1) as f64;
        let count = self.unigrams.get(&w).copied().unwrap_or(0) as f64;
        (count + self.params.add_k) / (self.event_total as f64 + self.params.add_k * events)
    }

    /// `p(w | u, v)` for ids in the event space.
    pub fn prob(&self, u: TokenId, v: TokenId, w: TokenId) -> f64 {
        let [l3, l2, l1] = self.params.lambdas;
        let p1 = self.unigram_prob(w);
        let Some(&ctx2) = self.bigram_ctx.get(&v) else {
            return p1;
        };
        let p2 = self.bigrams.get(&(v, w)).copied().unwrap_or(0) as f64 / ctx2 as f64;
        let Some(&ctx3) = self.trigram_ctx.get(&(u, v)) else {
            return (l2 * p2 + l1 * p1) / (l2 + l1);
        };
        let p3 = self.trigrams.get(&(u, v, w)).copied().unwrap_or(0) as f64 / ctx3 as f64;
        l3 * p3 + l2 * p2 + l1 * p1
    }

    /// Perplexity over the tokens plus the end-of-sentence event.
    pub fn perplexity(&self, tokens: &[String]) -> Result<FluencyScore> {
        if tokens.is_empty() {
            return Err(Error::invalid("perplexity of an empty sentence"));
        }
        let (mut u, mut v) = (BOS, BOS);
        let mut log_sum = 0.0;
        let mut count = 0usize;
        for w in tokens.iter().map(|t| self.id(t)).chain(std::iter::once(EOS)) {
            log_sum += self.prob(u, v, w).ln();
            count += 1;
            u = v;
            v = w;
        }
        Ok(FluencyScore {
            ppl: (-log_sum / count as f64).exp(),
            token_count: Some(count),
        })
    }

    /// Writes the model: a text header terminated by a blank line, then
    /// little-endian length-prefixed tables.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let [l3, l2, l1] = self.params.lambdas;
        writeln!(out, "{MAGIC} {FORMAT_VERSION}")?;
        writeln!(out, "order {}", Self::ORDER)?;
        writeln!(out, "lambdas {l3} {l2} {l1}")?;
        writeln!(out, "add_k {}", self.params.add_k)?;
        writeln!(out, "vocab_size {}", self.vocab.len())?;
        writeln!(out)?;

        put_u32(&mut out, self.vocab.len() as u32)?;
        for tok in &self.vocab {
            put_u32(&mut out, tok.len() as u32)?;
            out.write_all(tok.as_bytes())?;
        }
        let mut tri: Vec<_> = self.trigrams.iter().collect();
        tri.sort_unstable();
        put_u32(&mut out, tri.len() as u32)?;
        for (&(u, v, w), &c) in tri {
            for id in [u, v, w] {
                put_u32(&mut out, id)?;
            }
            out.write_all(&c.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut input: R) -> Result<Self> {
        let mut header = HashMap::new();
        let mut first = true;
        loop {
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                return Err(Error::ModelFormat("truncated header".into()));
            }
            let line = line.trim_end_matches(['\n', '\r']);
            if first {
                let version = line
                    .strip_prefix(MAGIC)
                    .map(str::trim)
                    .ok_or_else(|| Error::ModelFormat("not a parasift language model".into()))?;
                if version != FORMAT_VERSION.to_string() {
                    return Err(Error::ModelFormat(format!("unsupported version {version}")));
                }
                first = false;
                continue;
            }
            if line.is_empty() {
                break;
            }
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| Error::ModelFormat(format!("bad header line {line:?}")))?;
            header.insert(key.to_owned(), value.to_owned());
        }
        let field = |k: &str| {
            header
                .get(k)
                .ok_or_else(|| Error::ModelFormat(format!("missing header field {k}")))
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::ModelFormat(format!("bad number {s:?}")))
        };
        if field("order")? != "3" {
            return Err(Error::ModelFormat("only order 3 is supported".into()));
        }
        let lambdas: Vec<f64> = field("lambdas")?
            .split_whitespace()
            .map(num)
            .collect::<Result<_>>()?;
        let lambdas: [f64; 3] = lambdas
            .try_into()
            .map_err(|_| Error::ModelFormat("expected three lambdas".into()))?;
        let params = LmParams {
            lambdas,
            add_k: num(field("add_k")?)?,
        };
        params.validate()?;

        let vocab_len = get_u32(&mut input)? as usize;
        if field("vocab_size")?.parse::<usize>().ok() != Some(vocab_len) {
            return Err(Error::ModelFormat("vocab_size header disagrees with table".into()));
        }
        let mut vocab = Vec::with_capacity(vocab_len);
        for _ in 0..vocab_len {
            let len = get_u32(&mut input)? as usize;
            let mut buf = vec![0u8; len];
            input.read_exact(&mut buf)?;
            vocab.push(String::from_utf8(buf).map_err(|_| Error::ModelFormat("vocabulary is not UTF-8".into()))?);
        }
        if vocab.len() < RESERVED.len() || vocab[..3] != RESERVED {
            return Err(Error::ModelFormat("reserved symbols missing".into()));
        }
        let mut lm = Self::empty(params, vocab);
        let entries = get_u32(&mut input)?;
        for _ in 0..entries {
            let u = get_u32(&mut input)?;
            let v = get_u32(&mut input)?;
            let w = get_u32(&mut input)?;
            let mut c = [0u8; 8];
            input.read_exact(&mut c)?;
            if [u, v, w].iter().any(|&id| id as usize >= vocab_len) {
                return Err(Error::ModelFormat("token id out of range".into()));
            }
            lm.add_event(u, v, w, u64::from_le_bytes(c));
        }
        Ok(lm)
    }
}

fn put_u32<W: Write>(out: &mut W, v: u32) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}

fn get_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::ModelFormat("truncated table".into()),
        _ => Error::Io(e),
    })?;
    Ok(u32::from_le_bytes(b))
}
