//! Replays the golden protocol fixtures through the real client code paths.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use parasift_core::scorers::{RemoteScorer, ScorerEndpoint, ScorerKind};
use parasift_core::translator::{
    generate_direct, generate_roundtrip, HttpTranslator, TranslateRequest, TranslateResponse,
};
use parasift_core::transport::{JsonTransport, TransportError};
use parasift_core::{normalize, Error, GenerationConfig, Lang, Translator};
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Clone, Deserialize)]
pub struct Case {
    pub name: Option<String>,
    pub path: String,
    #[serde(default)]
    pub request: Option<Value>,
    pub status: u16,
    pub response: Value,
    pub expect: String,
}

pub const CASES: [&str; 14] = [
    "score_fluency_ok",
    "score_semantic_ok",
    "score_count_mismatch",
    "score_non_finite",
    "score_semantic_missing_source",
    "score_empty_texts",
    "score_server_error",
    "score_malformed_body",
    "translate_direct_ok",
    "translate_forward_ok",
    "translate_backward_ok",
    "translate_unsupported_pair",
    "translate_too_many_hypotheses",
    "translate_unsorted_scores",
];

pub fn load(name: &str) -> Case {
    let mut c: Case = serde_json::from_str(&super::read(super::fixture(&format!("{name}.json")))).unwrap();
    c.name = Some(name.to_owned());
    c
}

/// Answers only requests that equal one of its golden requests.
pub struct FixtureTransport {
    cases: Vec<Case>,
    pub calls: AtomicUsize,
}

impl FixtureTransport {
    pub fn new(cases: Vec<Case>) -> Arc<Self> {
        Arc::new(FixtureTransport {
            cases,
            calls: AtomicUsize::new(0),
        })
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl JsonTransport for FixtureTransport {
    fn post_json(&self, url: &str, body: &Value, _timeout: Duration) -> Result<Value, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let case = self
            .cases
            .iter()
            .find(|c| url.ends_with(&c.path) && c.request.as_ref() == Some(body))
            .ok_or_else(|| TransportError::Connection(format!("no golden request matches {url} {body}")))?;
        if case.status == 200 {
            Ok(case.response.clone())
        } else {
            Err(TransportError::Status {
                code: case.status,
                body: case.response.to_string(),
            })
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn score_case(case: &Case) -> Result<(), String> {
    let req = case.request.as_ref().unwrap();
    let kind: ScorerKind = serde_json::from_value(req["kind"].clone()).map_err(|e| e.to_string())?;
    let source = req["source"].as_str().map(normalize);
    let texts: Vec<_> = req["texts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| normalize(t.as_str().unwrap()))
        .collect();
    let transport = FixtureTransport::new(vec![case.clone()]);
    let client = RemoteScorer::with_transport(ScorerEndpoint::new("http://fixture", kind), transport.clone())
        .map_err(|e| e.to_string())?;
    let got = client.score_remote(source.as_ref(), &texts);
    match case.expect.as_str() {
        "ok" => {
            let want: Vec<f64> = serde_json::from_value(case.response["scores"].clone()).unwrap();
            let got = got.map_err(|e| format!("unexpected error: {e}"))?;
            check(got == want, || format!("scores {got:?} != {want:?}"))?;
            check(transport.calls() == 1, || format!("{} calls", transport.calls()))
        }
        "client_error" => {
            check(matches!(got, Err(Error::RemoteScorer { batch: 0, .. })), || {
                format!("expected a scorer error, got {got:?}")
            })
        }
        "rejected_before_send" => check(got.is_err() && transport.calls() == 0, || {
            format!("expected local rejection, got {got:?} after {} calls", transport.calls())
        }),
        other => Err(format!("unknown expectation {other}")),
    }
}

fn translate_case(case: &Case) -> Result<(), String> {
    let req: TranslateRequest = serde_json::from_value(case.request.clone().unwrap()).map_err(|e| e.to_string())?;
    let source = normalize(&req.texts[0]);
    // every translate fixture decodes from English
    let cfg = GenerationConfig::new(Lang::new("en").unwrap());

    // The typed client must serialise the golden body the golden body.
    let transport = FixtureTransport::new(vec![case.clone()]);
    let client = HttpTranslator::with_transport("http://fixture", transport.clone());
    let raw = client.translate(&req);
    match (case.expect.as_str(), &raw) {
        ("ok", Ok(resp)) => {
            let want: TranslateResponse = serde_json::from_value(case.response.clone()).unwrap();
            check(*resp == want, || format!("{resp:?} != {want:?}"))?;
            resp.validate(&req)?;
        }
        ("client_error", Ok(resp)) => check(resp.validate(&req).is_err(), || "invalid reply accepted".into())?,
        ("client_error", Err(TransportError::Status { code, .. })) => {
            check(*code == case.status, || format!("status {code}"))?
        }
        (_, other) => return Err(format!("unexpected reply {other:?}")),
    }

    // Generation must emit exactly the golden request.
    if req.src_lang == req.tgt_lang {
        let transport = FixtureTransport::new(vec![case.clone()]);
        let client = HttpTranslator::with_transport("http://fixture", transport.clone());
        let got = generate_direct(&source, &cfg, &client);
        match case.expect.as_str() {
            "ok" => {
                let cands = got.map_err(|e| e.to_string())?;
                let texts: Vec<_> = cands.iter().map(|c| c.text.as_str().to_owned()).collect();
                let want: Vec<_> = case.response["results"][0]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|h| normalize(h["text"].as_str().unwrap()).into_string())
                    .collect();
                check(texts == want, || format!("{texts:?} != {want:?}"))?;
            }
            _ => check(matches!(got, Err(Error::Translator { .. })), || format!("got {got:?}"))?,
        }
        check(transport.calls() == 1, || format!("{} calls", transport.calls()))?;
    } else if req.src_lang == "en" {
        let pivot = Lang::new(&req.tgt_lang).unwrap();
        let mut cases = vec![case.clone()];
        if case.expect == "ok" {
            cases.push(load("translate_backward_ok"));
        }
        let transport = FixtureTransport::new(cases);
        let client = HttpTranslator::with_transport("http://fixture", transport.clone());
        let got = generate_roundtrip(&source, &pivot, &cfg, &client);
        match case.expect.as_str() {
            "ok" => {
                let cands = got.map_err(|e| e.to_string())?;
                check(cands.len() == 1 && cands[0].text.as_str() == "the boat paused again", || {
                    format!("{cands:?}")
                })?;
                check(transport.calls() == 2, || format!("{} calls", transport.calls()))?;
            }
            _ => check(
                matches!(got, Err(Error::Translator { leg: parasift_core::CallLeg::Forward, .. })),
                || format!("got {got:?}"),
            )?,
        }
    }
    Ok(())
}

/// Checks one fixture; `Ok(false)` when the case only applies to services.
pub fn run_case(name: &str) -> Result<bool, String> {
    let case = load(name);
    if case.expect == "service_only" {
        return Ok(false);
    }
    match case.path.as_str() {
        "/v1/score" => score_case(&case)?,
        "/v1/translate" => translate_case(&case)?,
        other => return Err(format!("unknown path {other}")),
    }
    Ok(true)
}

/// The in-process mock must agree with every translate fixture.
pub fn mock_agrees(name: &str, mock: &dyn Translator) -> Result<(), String> {
    let case = load(name);
    let req: TranslateRequest = serde_json::from_value(case.request.clone().unwrap()).unwrap();
    let got = mock.translate(&req);
    match (case.expect.as_str(), got) {
        ("ok", Ok(resp)) => {
            let want: TranslateResponse = serde_json::from_value(case.response).unwrap();
            check(resp == want, || format!("{resp:?} != {want:?}"))
        }
        ("client_error", Err(TransportError::Status { code, .. })) => {
            check(code == case.status, || format!("status {code}"))
        }
        ("client_error", Ok(resp)) if case.status == 200 => {
            // fixture simulates a misbehaving server; the mock must stay valid
            resp.validate(&req)
        }
        (_, other) => Err(format!("unexpected {other:?}")),
    }
}
