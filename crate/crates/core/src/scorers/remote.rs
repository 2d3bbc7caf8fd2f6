use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::SemanticScore;
use crate::textkit::NormalizedText;
use crate::transport::{join_url, HttpTransport, JsonTransport, TransportError};
use crate::{Error, Result};

use super::{FluencyScore, FluencyScorer, SemanticScorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Fluency,
    Semantic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerEndpoint {
    pub base_url: String,
    pub kind: ScorerKind,
    pub timeout: Duration,
    pub max_batch: usize,
}

impl ScorerEndpoint {
    pub fn new(base_url: impl Into<String>, kind: ScorerKind) -> Self {
        ScorerEndpoint {
            base_url: base_url.into(),
            kind,
            timeout: Duration::from_secs(30),
            max_batch: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_url.trim().is_empty() {
            return Err(Error::invalid("scorer endpoint base_url is empty"));
        }
        if self.timeout.is_zero() {
            return Err(Error::invalid("scorer endpoint timeout must be positive"));
        }
        if self.max_batch == 0 {
            return Err(Error::invalid("scorer endpoint max_batch must be positive"));
        }
        Ok(())
    }

    pub fn url(&self) -> String {
        join_url(&self.base_url, "v1/score")
    }
}

/// Body of `POST /v1/score`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub kind: ScorerKind,
    pub source: Option<String>,
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub scores: Vec<f64>,
}

/// Client for the scorer protocol. Texts are sent in batches of at most
/// `max_batch`; batches may be in flight concurrently and results are
/// reassembled in input order.
#[derive(Clone)]
pub struct RemoteScorer {
    endpoint: ScorerEndpoint,
    transport: Arc<dyn JsonTransport>,
}

impl std::fmt::Debug for RemoteScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteScorer").field("endpoint", &self.endpoint).finish()
    }
}

impl RemoteScorer {
    pub fn http(endpoint: ScorerEndpoint) -> Result<Self> {
        Self::with_transport(endpoint, Arc::new(HttpTransport))
    }

    pub fn with_transport(endpoint: ScorerEndpoint, transport: Arc<dyn JsonTransport>) -> Result<Self> {
        endpoint.validate()?;
        Ok(RemoteScorer { endpoint, transport })
    }

    pub fn endpoint(&self) -> &ScorerEndpoint {
        &self.endpoint
    }

    fn fail(&self, batch: usize, message: impl Into<String>) -> Error {
        Error::RemoteScorer {
            endpoint: self.endpoint.base_url.clone(),
            batch,
            message: message.into(),
        }
    }

    /// Raw protocol scores, one per text.
    pub fn score_remote(&self, source: Option<&NormalizedText>, texts: &[NormalizedText]) -> Result<Vec<f64>> {
        if texts.is_empty() {
            return Err(Error::invalid("remote scoring needs at least one text"));
        }
        if self.endpoint.kind == ScorerKind::Semantic && source.is_none() {
            return Err(Error::invalid("semantic scoring needs a source"));
        }
        let url = self.endpoint.url();
        let batches: Vec<Result<Vec<f64>>> = texts
            .par_chunks(self.endpoint.max_batch)
            .enumerate()
            .map(|(i, chunk)| self.score_batch(&url, i, source, chunk))
            .collect();
        let mut out = Vec::with_capacity(texts.len());
        for batch in batches {
            out.extend(batch?);
        }
        Ok(out)
    }

    fn score_batch(
        &self,
        url: &str,
        index: usize,
        source: Option<&NormalizedText>,
        chunk: &[NormalizedText],
    ) -> Result<Vec<f64>> {
        let req = ScoreRequest {
            kind: self.endpoint.kind,
            source: source.map(|s| s.as_str().to_owned()),
            texts: chunk.iter().map(|t| t.as_str().to_owned()).collect(),
        };
        let body = serde_json::to_value(&req)?;
        let resp = self
            .transport
            .post_json(url, &body, self.endpoint.timeout)
            .map_err(|e| match e {
                TransportError::Timeout => self.fail(index, "timeout"),
                other => self.fail(index, other.to_string()),
            })?;
        let parsed: ScoreResponse =
            serde_json::from_value(resp).map_err(|e| self.fail(index, format!("malformed response: {e}")))?;
        if parsed.scores.len() != chunk.len() {
            return Err(self.fail(
                index,
                format!("expected {} scores, got {}", chunk.len(), parsed.scores.len()),
            ));
        }
        if parsed.scores.iter().any(|s| !s.is_finite()) {
            return Err(self.fail(index, "non-finite score"));
        }
        Ok(parsed.scores)
    }

    fn require(&self, kind: ScorerKind) -> Result<()> {
        if self.endpoint.kind != kind {
            return Err(Error::invalid(format!(
                "endpoint {} is configured as {:?}, not {:?}",
                self.endpoint.base_url, self.endpoint.kind, kind
            )));
        }
        Ok(())
    }
}

impl FluencyScorer for RemoteScorer {
    fn label(&self) -> String {
        format!("remote:{}", self.endpoint.base_url)
    }

    fn score_fluency(&self, texts: &[NormalizedText]) -> Result<Vec<FluencyScore>> {
        self.require(ScorerKind::Fluency)?;
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let scores = self.score_remote(None, texts)?;
        Ok(scores
            .into_iter()
            .map(|ppl| FluencyScore {
                ppl,
                token_count: None,
            })
            .collect())
    }
}

impl SemanticScorer for RemoteScorer {
    fn label(&self) -> String {
        format!("remote:{}", self.endpoint.base_url)
    }

    /// The protocol carries a single f1-like number; precision and recall mirror it.
    fn score_semantic(&self, source: &NormalizedText, texts: &[NormalizedText]) -> Result<Vec<SemanticScore>> {
        self.require(ScorerKind::Semantic)?;
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let scores = self.score_remote(Some(source), texts)?;
        Ok(scores
            .into_iter()
            .map(|s| SemanticScore {
                precision: s,
                recall: s,
                f1: s,
            })
            .collect())
    }
}
