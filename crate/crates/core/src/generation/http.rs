// SPDX-License-Identifier: Apache-2.0

use std::io::{BufRead, BufReader, Read};
use std::time::{Duration, Instant};

use serde_json::Value;

use super::{BackendError, ChatBackend, ChatRequest, ChatResponse, GenerationError};

/// OpenAI-compatible chat-completions endpoint with server-sent-event
/// streaming.
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    url: String,
    api_key: Option<String>,
}

impl HttpBackend {
    /// `url` is either the full `.../chat/completions` URL or the API base
    /// (e.g. `http://host:8000/v1`). The key is read from `api_key_env` when
    /// given.
    pub fn new(url: &str, api_key_env: Option<&str>, timeout: Duration) -> Result<Self, GenerationError> {
        let url = if url.trim_end_matches('/').ends_with("/chat/completions") {
            url.to_string()
        } else {
            format!("{}/chat/completions", url.trim_end_matches('/'))
        };
        let api_key = match api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                GenerationError::Endpoint(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| GenerationError::Endpoint(e.to_string()))?;
        Ok(HttpBackend { client, url, api_key })
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<ChatResponse, BackendError> {
        let start = Instant::now();
        let mut req = self.client.post(&self.url).json(request.payload);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let body = resp.text().unwrap_or_default();
            return Err(BackendError::Http { status: status.as_u16(), body });
        }
        let is_stream = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .is_some_and(|v| v.contains("text/event-stream"));
        if is_stream {
            read_event_stream(resp, start)
        } else {
            let ttft = start.elapsed().as_secs_f64();
            let body: Value = resp.json().map_err(|e| BackendError::Transport(e.to_string()))?;
            let content = body["choices"][0]["message"]["content"].as_str().unwrap_or_default().to_string();
            Ok(ChatResponse { content, usage: usage(&body), ttft })
        }
    }
}

fn usage(v: &Value) -> Option<(u64, u64)> {
    let u = v.get("usage")?;
    Some((u.get("prompt_tokens")?.as_u64()?, u.get("completion_tokens")?.as_u64()?))
}

/// Accumulates `choices[0].delta.content` over `data:` events until
/// `[DONE]`. TTFT is taken at the first event received.
pub(crate) fn read_event_stream<R: Read>(body: R, start: Instant) -> Result<ChatResponse, BackendError> {
    let mut out = ChatResponse::default();
    let mut first = true;
    for line in BufReader::new(body).lines() {
        let line = line.map_err(|e| BackendError::Transport(e.to_string()))?;
        let Some(data) = line.strip_prefix("data:") else { continue };
        if first {
            out.ttft = start.elapsed().as_secs_f64();
            first = false;
        }
        let data = data.trim();
        if data == "[DONE]" {
            break;
        }
        let Ok(chunk) = serde_json::from_str::<Value>(data) else {
            log::debug!("ignoring malformed stream chunk: {data}");
            continue;
        };
        if let Some(err) = chunk.get("error") {
            return Err(BackendError::Http { status: 500, body: err.to_string() });
        }
        if let Some(piece) = chunk["choices"][0]["delta"]["content"].as_str() {
            out.content.push_str(piece);
        }
        if let Some(u) = usage(&chunk) {
            out.usage = Some(u);
        }
    }
    Ok(out)
}
