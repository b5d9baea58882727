use std::time::Duration;

use log::{debug, warn};

use super::wire::{self, WireResponse, COMPLETE_PATH};
use super::{validate_response, CompleterError, CompletionRequest, CompletionResponse, ViewCompleter};

/// Upper bound on a response body.
pub const MAX_RESPONSE_BYTES: u64 = 1 << 30;

/// HTTP client for an external completion service.
///
/// The request id makes retries idempotent on the server side; retries are off
/// by default and only cover transport failures.
#[derive(Debug, Clone)]
pub struct RemoteCompleter {
    endpoint: String,
    timeout: Duration,
    retries: u32,
}

impl RemoteCompleter {
    /// `endpoint` is the service base URL, e.g. `http://127.0.0.1:8080`.
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout,
            retries: 0,
        }
    }

    pub fn with_retries(mut self, retries: u32) -> Self {
        self.retries = retries;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn url(&self) -> String {
        format!("{}{}", self.endpoint.trim_end_matches('/'), COMPLETE_PATH)
    }

    fn post_once(&self, agent: &ureq::Agent, body: &[u8]) -> Result<Vec<u8>, CompleterError> {
        let mut resp = agent
            .post(&self.url())
            .header("content-type", "application/json")
            .send(body)
            .map_err(|e| CompleterError::TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let bytes = resp
            .body_mut()
            .with_config()
            .limit(MAX_RESPONSE_BYTES)
            .read_to_vec()
            .map_err(|e| CompleterError::TransportError(format!("reading body: {e}")))?;
        match status {
            200 => Ok(bytes),
            400..=499 => Err(CompleterError::ProtocolError(format!(
                "HTTP {status}: {}",
                String::from_utf8_lossy(&bytes)
            ))),
            500..=599 => Err(CompleterError::TransportError(format!(
                "HTTP {status}: {}",
                String::from_utf8_lossy(&bytes)
            ))),
            _ => Err(CompleterError::ProtocolError(format!("unexpected HTTP status {status}"))),
        }
    }
}

impl ViewCompleter for RemoteCompleter {
    fn name(&self) -> &str {
        "remote"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, CompleterError> {
        req.validate()?;
        let body = serde_json::to_vec(&wire::encode_request(req)?)
            .map_err(|e| CompleterError::ProtocolError(e.to_string()))?;
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build();
        let agent: ureq::Agent = config.into();

        let mut attempt = 0;
        let bytes = loop {
            match self.post_once(&agent, &body) {
                Err(CompleterError::TransportError(e)) if attempt < self.retries => {
                    attempt += 1;
                    warn!("request {} attempt {attempt} failed: {e}", req.request_id);
                }
                other => break other?,
            }
        };
        debug!("request {}: {} response bytes", req.request_id, bytes.len());

        let wire: WireResponse =
            serde_json::from_slice(&bytes).map_err(|e| CompleterError::ProtocolError(format!("json: {e}")))?;
        if wire.request_id != req.request_id {
            return Err(CompleterError::ProtocolError(format!(
                "response id {:?} does not match request id {:?}",
                wire.request_id, req.request_id
            )));
        }
        let l = req.len();
        if wire.frames.len() != l {
            return Err(CompleterError::ProtocolError(format!("{} frames for {l} poses", wire.frames.len())));
        }
        if let Some(d) = &wire.depths {
            if d.len() != l {
                return Err(CompleterError::ProtocolError(format!("{} depth maps for {l} poses", d.len())));
            }
        }
        let resp = wire::decode_response(&wire)?;
        // references crossed the wire as 8-bit PNG; that is what must come back
        validate_response(&wire::quantized_request(req), &resp)?;
        Ok(resp)
    }
}

/// One-shot remote completion with no retries.
pub fn remote_complete(
    endpoint: &str,
    req: &CompletionRequest,
    timeout: Duration,
) -> Result<CompletionResponse, CompleterError> {
    RemoteCompleter::new(endpoint, timeout).complete(req)
}
