//! Blocking JSON-over-HTTP transport shared by the scorer and translator clients.

use std::time::Duration;

use serde_json::Value;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransportError {
    #[error("HTTP {code}: {body}")]
    Status { code: u16, body: String },
    #[error("request timed out")]
    Timeout,
    #[error("transport: {0}")]
    Connection(String),
    #[error("response is not JSON: {0}")]
    Decode(String),
}

/// POSTs a JSON body and returns the decoded JSON response of a 2xx reply.
pub trait JsonTransport: Send + Sync {
    fn post_json(&self, url: &str, body: &Value, timeout: Duration) -> Result<Value, TransportError>;
}

#[derive(Debug, Clone, Default)]
pub struct HttpTransport;

impl JsonTransport for HttpTransport {
    fn post_json(&self, url: &str, body: &Value, timeout: Duration) -> Result<Value, TransportError> {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        match agent.post(url).send_json(body) {
            Ok(resp) => resp
                .into_json::<Value>()
                .map_err(|e| TransportError::Decode(e.to_string())),
            Err(ureq::Error::Status(code, resp)) => Err(TransportError::Status {
                code,
                body: resp.into_string().unwrap_or_default(),
            }),
            Err(ureq::Error::Transport(t)) => {
                let msg = t.to_string();
                if msg.contains("timed out") {
                    Err(TransportError::Timeout)
                } else {
                    Err(TransportError::Connection(msg))
                }
            }
        }
    }
}

pub(crate) fn join_url(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path.trim_start_matches('/'))
}
