//! A blocking translator-protocol server backed by mock tables.

use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use parasift_core::translator::{MockTranslator, TranslateRequest};
use parasift_core::transport::TransportError;
use parasift_core::Translator;
use serde_json::json;
use tiny_http::{Header, Method, Request, Response, Server};

use crate::config::config_err;

fn reply(req: Request, status: u16, body: serde_json::Value) {
    let header = Header::from_bytes("Content-Type", "application/json").unwrap();
    let resp = Response::from_string(body.to_string())
        .with_status_code(status)
        .with_header(header);
    if let Err(e) = req.respond(resp) {
        eprintln!("failed to send response: {e}");
    }
}

fn error(msg: impl Into<String>) -> serde_json::Value {
    json!({ "error": msg.into() })
}

/// Status and body for one request body.
pub fn handle(mock: &MockTranslator, body: &str) -> (u16, serde_json::Value) {
    let req: TranslateRequest = match serde_json::from_str(body) {
        Ok(r) => r,
        Err(e) => return (400, error(format!("malformed body: {e}"))),
    };
    if req.texts.is_empty() {
        return (422, error("texts must not be empty"));
    }
    if req.num_return == 0 || req.num_return > req.beam_size {
        return (422, error("num_return must be in 1..=beam_size"));
    }
    match mock.translate(&req) {
        Ok(resp) => (200, serde_json::to_value(resp).expect("response serializes")),
        Err(TransportError::Status { code, body }) => (code, error(body)),
        Err(e) => (500, error(e.to_string())),
    }
}

pub fn serve(tables: &Path, host: &str, port: u16) -> Result<()> {
    let text = std::fs::read_to_string(tables)
        .map_err(|e| config_err(format!("cannot read tables {}: {e}", tables.display())))?;
    let mock = MockTranslator::from_json(&text).map_err(|e| config_err(format!("bad tables: {e}")))?;
    let server = Server::http((host, port)).map_err(|e| anyhow!("cannot bind {host}:{port}: {e}"))?;
    let addr = server
        .server_addr()
        .to_ip()
        .context("server is not listening on an IP socket")?;
    println!("listening on http://{addr}");
    std::io::stdout().flush()?;

    for mut req in server.incoming_requests() {
        if req.url() != "/v1/translate" {
            reply(req, 404, error("not found"));
            continue;
        }
        if *req.method() != Method::Post {
            reply(req, 405, error("use POST"));
            continue;
        }
        let mut body = String::new();
        if let Err(e) = req.as_reader().read_to_string(&mut body) {
            reply(req, 400, error(format!("unreadable body: {e}")));
            continue;
        }
        let (status, value) = handle(&mock, &body);
        reply(req, status, value);
    }
    Ok(())
}
