// SPDX-License-Identifier: Apache-2.0

//! Candidate generation against chat-completions endpoints.

mod extract;
mod http;
mod replay;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::taskset::Task;

pub use extract::extract_first_fenced_block;
pub use http::HttpBackend;
pub use replay::{replay_key, ReplayBackend};

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("sample index {index} out of range [0, {bound})")]
    SampleIndex { index: u32, bound: u32 },
    #[error("invalid decoding configuration {0}: {1}")]
    InvalidConfig(DecodingConfig, &'static str),
    #[error("endpoint configuration: {0}")]
    Endpoint(String),
}

/// Failure reported by a chat backend for a single request.
#[derive(Debug, Clone, Error)]
pub enum BackendError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    /// Not worth retrying (missing replay fixture, malformed request).
    #[error("{0}")]
    Fatal(String),
}

impl BackendError {
    fn retryable(&self) -> bool {
        match self {
            BackendError::Transport(_) => true,
            BackendError::Http { status, .. } => *status == 429 || *status >= 500,
            BackendError::Fatal(_) => false,
        }
    }
}

/// The four swept decoding parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecodingConfig {
    pub temperature: f64,
    pub top_p: f64,
    pub repetition_penalty: f64,
    pub presence_penalty: f64,
}

impl DecodingConfig {
    /// Out-of-the-box setting (1.0, 1.0, 1.0, 0).
    pub const DEFAULT: DecodingConfig = DecodingConfig {
        temperature: 1.0,
        top_p: 1.0,
        repetition_penalty: 1.0,
        presence_penalty: 0.0,
    };

    pub fn new(
        temperature: f64,
        top_p: f64,
        repetition_penalty: f64,
        presence_penalty: f64,
    ) -> Result<Self, GenerationError> {
        let c = DecodingConfig { temperature, top_p, repetition_penalty, presence_penalty };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        let err = |m| Err(GenerationError::InvalidConfig(*self, m));
        if !self.as_array().iter().all(|v| v.is_finite()) {
            return err("all fields must be finite");
        }
        if self.temperature < 0.0 {
            return err("temperature must be >= 0");
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return err("top_p must lie in (0, 1]");
        }
        if self.repetition_penalty < 1.0 {
            return err("repetition_penalty must be >= 1");
        }
        if !(-2.0..=2.0).contains(&self.presence_penalty) {
            return err("presence_penalty must lie in [-2, 2]");
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.temperature, self.top_p, self.repetition_penalty, self.presence_penalty]
    }

    fn bits(&self) -> [u64; 4] {
        // +0.0 and -0.0 compare equal, so they must hash equal
        self.as_array().map(|v| if v == 0.0 { 0 } else { v.to_bits() })
    }

    /// Fixed-precision serialization shared by store keys, seeds and replay
    /// fixture names.
    pub fn canonical(&self) -> String {
        let f = |v: f64| format!("{:.6}", if v == 0.0 { 0.0 } else { v });
        format!(
            "{},{},{},{}",
            f(self.temperature),
            f(self.top_p),
            f(self.repetition_penalty),
            f(self.presence_penalty)
        )
    }

    pub fn is_default(&self) -> bool {
        *self == Self::DEFAULT
    }
}

impl PartialEq for DecodingConfig {
    fn eq(&self, other: &Self) -> bool {
        self.bits() == other.bits()
    }
}

impl Eq for DecodingConfig {}

impl Hash for DecodingConfig {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits().hash(state);
    }
}

impl fmt::Display for DecodingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [t, p, r, pp] = self.as_array().map(|v| if v == 0.0 { 0.0 } else { v });
        write!(f, "({t},{p},{r},{pp})")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Pricing {
    /// Currency units per prompt token.
    pub input: f64,
    /// Currency units per completion token.
    pub output: f64,
}

impl Pricing {
    pub fn cost(&self, prompt_tokens: u64, completion_tokens: u64) -> f64 {
        prompt_tokens as f64 * self.input + completion_tokens as f64 * self.output
    }
}

/// Request shaping and retry policy shared by every endpoint of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSettings {
    pub system_prompt: Option<String>,
    /// User message template; `{prompt}` is replaced by the task prompt.
    pub prompt_template: String,
    /// Name of the top-level field carrying the repetition penalty.
    pub repetition_penalty_field: String,
    pub max_tokens: Option<u32>,
    /// Exclusive upper bound for sample indices.
    pub samples_per_task: u32,
    pub send_seed: bool,
    pub retries: u32,
    pub backoff_ms: u64,
    pub timeout_secs: u64,
    pub run_seed: u64,
}

pub const DEFAULT_SYSTEM_PROMPT: &str = "You are an expert digital hardware designer. \
Answer with one complete synthesizable Verilog implementation inside a single ```verilog fenced code block.";

impl Default for GenerationSettings {
    fn default() -> Self {
        GenerationSettings {
            system_prompt: Some(DEFAULT_SYSTEM_PROMPT.to_string()),
            prompt_template: "{prompt}".to_string(),
            repetition_penalty_field: "repetition_penalty".to_string(),
            max_tokens: None,
            samples_per_task: 5,
            send_seed: true,
            retries: 3,
            backoff_ms: 500,
            timeout_secs: 300,
            run_seed: 0,
        }
    }
}

/// What a backend needs to answer one request.
#[derive(Debug, Clone)]
pub struct ChatRequest<'a> {
    pub task_id: &'a str,
    pub config: &'a DecodingConfig,
    pub sample_index: u32,
    pub payload: &'a Value,
}

#[derive(Debug, Clone, Default)]
pub struct ChatResponse {
    pub content: String,
    /// `(prompt_tokens, completion_tokens)` when the endpoint reported usage.
    pub usage: Option<(u64, u64)>,
    /// Seconds from sending to the first streamed chunk.
    pub ttft: f64,
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<ChatResponse, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub task_id: String,
    pub model: String,
    pub config: DecodingConfig,
    pub sample_index: u32,
    pub raw_response: String,
    pub extracted_rtl: Option<String>,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// Token counts are whitespace-chunk estimates, not endpoint usage.
    pub tokens_estimated: bool,
    /// Seconds.
    pub ttft: f64,
    /// Seconds.
    pub wall_time: f64,
    pub request_cost: f64,
    /// Requests sent, including retries.
    pub attempts: u32,
    /// Set when every attempt failed; carries the last error (HTTP error
    /// bodies included).
    pub error: Option<String>,
}

impl GenerationRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

pub fn derive_seed(run_seed: u64, task_id: &str, config: &DecodingConfig, sample_index: u32) -> u64 {
    let digest = Sha256::digest(format!("{run_seed}|{task_id}|{}|{sample_index}", config.canonical()));
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    // 31 bits keeps the seed within every endpoint's integer range
    u64::from_le_bytes(b) & 0x7fff_ffff
}

fn user_message(settings: &GenerationSettings, task: &Task) -> String {
    settings.prompt_template.replace("{prompt}", &task.prompt)
}

/// Chat-completions payload for one sample.
pub fn render_request(
    settings: &GenerationSettings,
    task: &Task,
    model: &str,
    config: &DecodingConfig,
    sample_index: u32,
) -> Result<Value, GenerationError> {
    if sample_index >= settings.samples_per_task {
        return Err(GenerationError::SampleIndex { index: sample_index, bound: settings.samples_per_task });
    }
    config.validate()?;
    let mut messages = Vec::new();
    if let Some(system) = &settings.system_prompt {
        messages.push(json!({"role": "system", "content": system}));
    }
    messages.push(json!({"role": "user", "content": user_message(settings, task)}));

    let mut payload = Map::new();
    payload.insert("model".into(), json!(model));
    payload.insert("messages".into(), Value::Array(messages));
    payload.insert("temperature".into(), json!(config.temperature));
    payload.insert("top_p".into(), json!(config.top_p));
    payload.insert("presence_penalty".into(), json!(config.presence_penalty));
    payload.insert(settings.repetition_penalty_field.clone(), json!(config.repetition_penalty));
    payload.insert("stream".into(), json!(true));
    payload.insert("stream_options".into(), json!({"include_usage": true}));
    if settings.send_seed {
        payload.insert(
            "seed".into(),
            json!(derive_seed(settings.run_seed, &task.id, config, sample_index)),
        );
    }
    if let Some(max) = settings.max_tokens {
        payload.insert("max_tokens".into(), json!(max));
    }
    Ok(Value::Object(payload))
}

fn whitespace_tokens(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}

/// One model endpoint: backend plus the identity and pricing used in records.
pub struct Generator {
    pub backend: Box<dyn ChatBackend>,
    pub model: String,
    pub pricing: Pricing,
    pub settings: GenerationSettings,
}

impl Generator {
    /// Sends one sample, retrying transient failures with exponential
    /// backoff. Exhausted retries yield a failed record, not an error.
    pub fn generate(
        &self,
        task: &Task,
        config: &DecodingConfig,
        sample_index: u32,
    ) -> Result<GenerationRecord, GenerationError> {
        let payload = render_request(&self.settings, task, &self.model, config, sample_index)?;
        let request = ChatRequest { task_id: &task.id, config, sample_index, payload: &payload };
        let retries = self.settings.retries.max(1);

        let mut record = GenerationRecord {
            task_id: task.id.clone(),
            model: self.model.clone(),
            config: *config,
            sample_index,
            raw_response: String::new(),
            extracted_rtl: None,
            prompt_tokens: 0,
            completion_tokens: 0,
            tokens_estimated: false,
            ttft: 0.0,
            wall_time: 0.0,
            request_cost: 0.0,
            attempts: 0,
            error: None,
        };

        for attempt in 0..retries {
            record.attempts = attempt + 1;
            let start = Instant::now();
            match self.backend.complete(&request) {
                Ok(resp) => {
                    let wall = start.elapsed().as_secs_f64();
                    let (prompt_tokens, completion_tokens, estimated) = match resp.usage {
                        Some((p, c)) => (p, c, false),
                        None => {
                            let prompt_text = self.settings.system_prompt.as_deref().unwrap_or("").to_string()
                                + " "
                                + &user_message(&self.settings, task);
                            (whitespace_tokens(&prompt_text), whitespace_tokens(&resp.content), true)
                        }
                    };
                    record.extracted_rtl = extract_first_fenced_block(&resp.content);
                    record.raw_response = resp.content;
                    record.prompt_tokens = prompt_tokens;
                    record.completion_tokens = completion_tokens;
                    record.tokens_estimated = estimated;
                    record.ttft = resp.ttft.clamp(0.0, wall);
                    record.wall_time = wall;
                    record.request_cost = self.pricing.cost(prompt_tokens, completion_tokens);
                    record.error = None;
                    return Ok(record);
                }
                Err(e) => {
                    log::warn!("{} {} {}#{}: attempt {} failed: {e}", self.model, task.id, config, sample_index, attempt + 1);
                    record.wall_time += start.elapsed().as_secs_f64();
                    let retry = e.retryable();
                    record.error = Some(e.to_string());
                    if !retry {
                        break;
                    }
                    if attempt + 1 < retries {
                        std::thread::sleep(Duration::from_millis(self.settings.backoff_ms << attempt));
                    }
                }
            }
        }
        Ok(record)
    }
}
