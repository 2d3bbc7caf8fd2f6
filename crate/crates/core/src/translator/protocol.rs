use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::transport::{join_url, HttpTransport, JsonTransport, TransportError};

/// Body of `POST /v1/translate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateRequest {
    pub src_lang: String,
    pub tgt_lang: String,
    pub texts: Vec<String>,
    pub beam_size: usize,
    pub num_return: usize,
    pub no_repeat_ngram: usize,
    pub block_source_overlap_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub text: String,
    pub score: f64,
}

/// `results[i]` holds the hypotheses for `texts[i]`, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateResponse {
    pub results: Vec<Vec<Hypothesis>>,
}

impl TranslateResponse {
    /// Checks the response against the request it answers.
    pub fn validate(&self, req: &TranslateRequest) -> Result<(), String> {
        if self.results.len() != req.texts.len() {
            return Err(format!(
                "expected {} result lists, got {}",
                req.texts.len(),
                self.results.len()
            ));
        }
        for (i, hyps) in self.results.iter().enumerate() {
            if hyps.len() > req.num_return {
                return Err(format!(
                    "text {i}: {} hypotheses exceed num_return {}",
                    hyps.len(),
                    req.num_return
                ));
            }
            if hyps.iter().any(|h| !h.score.is_finite()) {
                return Err(format!("text {i}: non-finite score"));
            }
            if hyps.windows(2).any(|w| w[0].score < w[1].score) {
                return Err(format!("text {i}: hypotheses not in descending score order"));
            }
        }
        Ok(())
    }
}

/// Anything that answers translate requests: an HTTP endpoint or an in-process mock.
pub trait Translator: Send + Sync {
    fn label(&self) -> String;

    fn translate(&self, req: &TranslateRequest) -> Result<TranslateResponse, TransportError>;
}

#[derive(Clone)]
pub struct HttpTranslator {
    base_url: String,
    timeout: Duration,
    transport: Arc<dyn JsonTransport>,
}

impl std::fmt::Debug for HttpTranslator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpTranslator")
            .field("base_url", &self.base_url)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl HttpTranslator {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self::with_transport(base_url, Arc::new(HttpTransport))
    }

    pub fn with_transport(base_url: impl Into<String>, transport: Arc<dyn JsonTransport>) -> Self {
        HttpTranslator {
            base_url: base_url.into(),
            timeout: Duration::from_secs(60),
            transport,
        }
    }

    pub fn timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

impl Translator for HttpTranslator {
    fn label(&self) -> String {
        format!("remote:{}", self.base_url)
    }

    fn translate(&self, req: &TranslateRequest) -> Result<TranslateResponse, TransportError> {
        let body = serde_json::to_value(req).map_err(|e| TransportError::Decode(e.to_string()))?;
        let resp = self
            .transport
            .post_json(&join_url(&self.base_url, "v1/translate"), &body, self.timeout)?;
        serde_json::from_value(resp).map_err(|e| TransportError::Decode(e.to_string()))
    }
}
