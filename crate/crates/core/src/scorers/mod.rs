//! Fluency and semantic scorers.
//!
//! The cascade talks to scorers through [`FluencyScorer`] and [`SemanticScorer`].
//! Local implementations use the trigram model in [`lm`] and the hashed
//! character n-gram embedder in [`embed`]; [`RemoteScorer`] speaks the HTTP
//! scorer protocol so a neural model can be swapped in.

mod embed;
pub mod lm;
mod remote;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::metrics::{greedy_match_score, SemanticScore, TokenWeights, UniformWeights};
use crate::textkit::{tokenize, NormalizedText};
use crate::Result;

pub use embed::{HashedCharNgramEmbedder, IdfTable, DEFAULT_HASH_SEED, EMBEDDING_DIM};
pub use lm::{LmParams, NGramLanguageModel};
pub use remote::{RemoteScorer, ScoreRequest, ScoreResponse, ScorerEndpoint, ScorerKind};

/// Perplexity of one sentence. Lower is more fluent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluencyScore {
    pub ppl: f64,
    /// Number of predicted events including end-of-sentence. Remote scorers
    /// tokenize internally and leave this empty.
    pub token_count: Option<usize>,
}

pub trait FluencyScorer: Send + Sync {
    /// Short provenance label, e.g. `local-trigram` or the endpoint URL.
    fn label(&self) -> String;

    /// One score per text, in input order.
    fn score_fluency(&self, texts: &[NormalizedText]) -> Result<Vec<FluencyScore>>;
}

pub trait SemanticScorer: Send + Sync {
    fn label(&self) -> String;

    /// Scores each text against `source`, in input order.
    fn score_semantic(&self, source: &NormalizedText, texts: &[NormalizedText]) -> Result<Vec<SemanticScore>>;
}

/// Trigram model perplexity.
#[derive(Debug, Clone)]
pub struct LocalFluency {
    lm: Arc<NGramLanguageModel>,
}

impl LocalFluency {
    pub fn new(lm: Arc<NGramLanguageModel>) -> Self {
        LocalFluency { lm }
    }

    pub fn model(&self) -> &NGramLanguageModel {
        &self.lm
    }
}

impl FluencyScorer for LocalFluency {
    fn label(&self) -> String {
        "local-trigram".into()
    }

    fn score_fluency(&self, texts: &[NormalizedText]) -> Result<Vec<FluencyScore>> {
        texts.iter().map(|t| self.lm.perplexity(&tokenize(t))).collect()
    }
}

/// Greedy matching over hashed character n-gram embeddings, optionally idf weighted.
#[derive(Debug, Clone, Default)]
pub struct LocalSemantic {
    embedder: HashedCharNgramEmbedder,
    idf: Option<Arc<IdfTable>>,
}

impl LocalSemantic {
    pub fn new(embedder: HashedCharNgramEmbedder, idf: Option<Arc<IdfTable>>) -> Self {
        LocalSemantic { embedder, idf }
    }
}

impl SemanticScorer for LocalSemantic {
    fn label(&self) -> String {
        match self.idf {
            Some(_) => "local-greedy-match-idf".into(),
            None => "local-greedy-match".into(),
        }
    }

    fn score_semantic(&self, source: &NormalizedText, texts: &[NormalizedText]) -> Result<Vec<SemanticScore>> {
        let src = tokenize(source);
        let weights: &dyn TokenWeights = match &self.idf {
            Some(idf) => idf.as_ref(),
            None => &UniformWeights,
        };
        texts
            .iter()
            .map(|t| greedy_match_score(&src, &tokenize(t), &self.embedder, weights))
            .collect()
    }
}
