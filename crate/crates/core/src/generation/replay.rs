// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use super::{BackendError, ChatBackend, ChatRequest, ChatResponse, DecodingConfig};

/// Fixture file stem for one sample: hex SHA-256 of
/// `task_id|canonical_config|sample_index`.
pub fn replay_key(task_id: &str, config: &DecodingConfig, sample_index: u32) -> String {
    hex::encode(Sha256::digest(format!("{task_id}|{}|{sample_index}", config.canonical())))
}

/// Offline backend answering from `<dir>/<replay_key>.txt`. The file holds
/// the raw assistant message. Usage is never reported, so token counts are
/// estimated.
pub struct ReplayBackend {
    dir: PathBuf,
    delay: Duration,
}

impl ReplayBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayBackend { dir: dir.into(), delay: Duration::ZERO }
    }

    /// Artificial latency per request.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn fixture_path(&self, task_id: &str, config: &DecodingConfig, sample_index: u32) -> PathBuf {
        fixture_path(&self.dir, task_id, config, sample_index)
    }
}

pub(crate) fn fixture_path(dir: &Path, task_id: &str, config: &DecodingConfig, sample_index: u32) -> PathBuf {
    dir.join(format!("{}.txt", replay_key(task_id, config, sample_index)))
}

impl ChatBackend for ReplayBackend {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<ChatResponse, BackendError> {
        let start = Instant::now();
        let path = self.fixture_path(request.task_id, request.config, request.sample_index);
        let content = std::fs::read_to_string(&path).map_err(|e| {
            BackendError::Fatal(format!("no replay fixture {} for {} {} #{}: {e}", path.display(), request.task_id, request.config, request.sample_index))
        })?;
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        Ok(ChatResponse { content, usage: None, ttft: start.elapsed().as_secs_f64() })
    }
}
