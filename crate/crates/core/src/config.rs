// SPDX-License-Identifier: Apache-2.0

//! Run configuration file.
//!
//! ```toml
//! seed = 42
//! store = "out/results.jsonl"          # relative paths resolve against this file
//! taskset = "out/taskset.json"         # written by `ingest`, read by the rest
//! samples_per_task = 5
//! include_default = true
//! benchmarks = ["verilogeval/manifest.toml", "rtllm/manifest.toml"]
//!
//! [[endpoints]]
//! model = "qwen3-coder"
//! backend = "http"                     # or "replay"
//! url = "http://localhost:8000/v1"
//! api_key_env = "LLM_API_KEY"          # keys come from the environment only
//! pricing = { input = 1.0e-7, output = 4.0e-7 }
//!
//! [axes]                               # omitted axes keep their defaults
//! temperature = [0.0, 0.4, 0.8, 1.2]
//!
//! [generation]                         # request shaping and retries
//! max_tokens = 4096
//!
//! [eda]
//! backend = "real"                     # or "stub" with stub_dir
//! baseline_dir = "out/baselines"
//! log_dir = "out/logs"
//! [eda.toolchain]
//! liberty = "lib/NangateOpenCellLibrary_typical.lib"
//!
//! [parallelism]
//! generation = 8
//! evaluation = 2
//! ```
//!
//! Unknown keys are rejected and every referenced input path must exist.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edaflow::{BaselineCache, EdaBackend, EdaError, Evaluator, StubBackend, ToolchainBackend, ToolchainConfig};
use crate::generation::{GenerationError, GenerationSettings, Generator, HttpBackend, Pricing, ReplayBackend};
use crate::sweep::{build_grid, SweepAxes, SweepError, SweepGrid};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("invalid configuration {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatBackendKind {
    #[default]
    Http,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointSpec {
    pub model: String,
    #[serde(default)]
    pub backend: ChatBackendKind,
    #[serde(default)]
    pub url: Option<String>,
    /// Environment variable holding the API key.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub pricing: Pricing,
    #[serde(default)]
    pub replay_dir: Option<PathBuf>,
    #[serde(default)]
    pub replay_delay_ms: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdaBackendKind {
    #[default]
    Real,
    Stub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdaSettings {
    pub backend: EdaBackendKind,
    pub stub_dir: Option<PathBuf>,
    pub toolchain: ToolchainConfig,
    pub scratch_dir: Option<PathBuf>,
    pub log_dir: Option<PathBuf>,
    pub baseline_dir: Option<PathBuf>,
}

impl Default for EdaSettings {
    fn default() -> Self {
        EdaSettings {
            backend: EdaBackendKind::Real,
            stub_dir: None,
            toolchain: ToolchainConfig::default(),
            scratch_dir: None,
            log_dir: None,
            baseline_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parallelism {
    pub generation: usize,
    pub evaluation: usize,
}

impl Default for Parallelism {
    fn default() -> Self {
        Parallelism { generation: 4, evaluation: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_store")]
    pub store: PathBuf,
    #[serde(default = "default_taskset")]
    pub taskset: PathBuf,
    #[serde(default = "default_samples")]
    pub samples_per_task: u32,
    #[serde(default = "default_true")]
    pub include_default: bool,
    #[serde(default)]
    pub benchmarks: Vec<PathBuf>,
    #[serde(default)]
    pub endpoints: Vec<EndpointSpec>,
    #[serde(default)]
    pub axes: SweepAxes,
    /// `samples_per_task` and `run_seed` are taken from the top level.
    #[serde(default)]
    pub generation: GenerationSettings,
    #[serde(default)]
    pub eda: EdaSettings,
    #[serde(default)]
    pub parallelism: Parallelism,
}

fn default_store() -> PathBuf {
    "results.jsonl".into()
}

fn default_taskset() -> PathBuf {
    "taskset.json".into()
}

fn default_samples() -> u32 {
    5
}

fn default_true() -> bool {
    true
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn resolve_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        resolve(base, p);
    }
}

impl RunConfig {
    /// Parses, resolves relative paths against the file's directory and
    /// validates.
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf();
        cfg.resolve_paths(&base);
        cfg.generation.samples_per_task = cfg.samples_per_task;
        cfg.generation.run_seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.store);
        resolve(base, &mut self.taskset);
        self.benchmarks.iter_mut().for_each(|p| resolve(base, p));
        for e in &mut self.endpoints {
            resolve_opt(base, &mut e.replay_dir);
        }
        resolve_opt(base, &mut self.eda.stub_dir);
        resolve_opt(base, &mut self.eda.toolchain.liberty);
        resolve_opt(base, &mut self.eda.scratch_dir);
        resolve_opt(base, &mut self.eda.log_dir);
        resolve_opt(base, &mut self.eda.baseline_dir);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.samples_per_task == 0 {
            return bad("samples_per_task must be at least 1".into());
        }
        for p in &self.benchmarks {
            if !p.is_file() {
                return bad(format!("benchmark manifest {} does not exist", p.display()));
            }
        }
        let mut models = std::collections::BTreeSet::new();
        for e in &self.endpoints {
            if !models.insert(&e.model) {
                return bad(format!("model `{}` has more than one endpoint", e.model));
            }
            match e.backend {
                ChatBackendKind::Http if e.url.is_none() => {
                    return bad(format!("endpoint `{}` needs a url", e.model));
                }
                ChatBackendKind::Replay => match &e.replay_dir {
                    Some(d) if d.is_dir() => {}
                    Some(d) => return bad(format!("replay directory {} does not exist", d.display())),
                    None => return bad(format!("replay endpoint `{}` needs replay_dir", e.model)),
                },
                ChatBackendKind::Http => {}
            }
            if e.pricing.input < 0.0 || e.pricing.output < 0.0 {
                return bad(format!("endpoint `{}` has a negative price", e.model));
            }
        }
        if self.eda.backend == EdaBackendKind::Stub {
            match &self.eda.stub_dir {
                Some(d) if d.is_dir() => {}
                Some(d) => return bad(format!("stub directory {} does not exist", d.display())),
                None => return bad("the stub evaluation backend needs eda.stub_dir".into()),
            }
        }
        if let Some(lib) = &self.eda.toolchain.liberty {
            if !lib.is_file() {
                return bad(format!("liberty file {} does not exist", lib.display()));
            }
        }
        if self.parallelism.generation == 0 || self.parallelism.evaluation == 0 {
            return bad("parallelism bounds must be at least 1".into());
        }
        self.grid().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn grid(&self) -> Result<SweepGrid, SweepError> {
        build_grid(&self.axes, self.include_default)
    }

    pub fn models(&self) -> Vec<String> {
        self.endpoints.iter().map(|e| e.model.clone()).collect()
    }

    pub fn build_generators(&self) -> Result<BTreeMap<String, Generator>, GenerationError> {
        let timeout = Duration::from_secs(self.generation.timeout_secs);
        let mut out = BTreeMap::new();
        for e in &self.endpoints {
            let backend: Box<dyn crate::generation::ChatBackend> = match e.backend {
                ChatBackendKind::Http => Box::new(HttpBackend::new(
                    e.url.as_deref().expect("validated"),
                    e.api_key_env.as_deref(),
                    timeout,
                )?),
                ChatBackendKind::Replay => Box::new(
                    ReplayBackend::new(e.replay_dir.clone().expect("validated"))
                        .with_delay(Duration::from_millis(e.replay_delay_ms)),
                ),
            };
            out.insert(
                e.model.clone(),
                Generator { backend, model: e.model.clone(), pricing: e.pricing, settings: self.generation.clone() },
            );
        }
        Ok(out)
    }

    pub fn build_evaluator(&self) -> Result<Evaluator, EdaError> {
        let backend: Arc<dyn EdaBackend> = match self.eda.backend {
            EdaBackendKind::Real => Arc::new(ToolchainBackend::new(self.eda.toolchain.clone())?),
            EdaBackendKind::Stub => {
                let mut b = StubBackend::new(self.eda.stub_dir.clone().expect("validated"));
                if let Some(lib) = &self.eda.toolchain.liberty {
                    b = b.with_liberty(lib);
                }
                Arc::new(b)
            }
        };
        let mut ev = Evaluator::new(backend);
        if let Some(d) = &self.eda.scratch_dir {
            std::fs::create_dir_all(d).map_err(|e| EdaError::Io(format!("{}: {e}", d.display())))?;
            ev = ev.with_scratch_root(d);
        }
        if let Some(d) = &self.eda.log_dir {
            ev = ev.with_log_dir(d);
        }
        Ok(ev)
    }

    pub fn baseline_cache(&self) -> BaselineCache {
        match &self.eda.baseline_dir {
            Some(d) => BaselineCache::persistent(d),
            None => BaselineCache::in_memory(),
        }
    }
}
