// SPDX-License-Identifier: Apache-2.0

//! Evaluation gates (syntax, simulation, synthesis) behind a pluggable
//! backend, plus golden baselines.

mod baseline;
mod process;
mod stub;
mod synthlog;
mod toolchain;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::generation::GenerationRecord;
use crate::metrics::hqi_score;
use crate::taskset::Task;
use crate::{GoldenBaseline, SynthStats};

pub use baseline::BaselineCache;
pub use stub::{StubBackend, StubSidecar};
pub use synthlog::{parse_synthesis_log, parse_with, CompiledPatterns, SynthLogPatterns};
pub use toolchain::{GateTimeouts, ToolchainBackend, ToolchainConfig};

#[derive(Debug, Clone, Error)]
pub enum EdaError {
    #[error("tool not found: {0}")]
    ToolMissing(String),
    #[error("evaluation backend configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("synthesis report: {0}")]
    SynthParse(String),
    #[error("golden design of task `{task_id}` fails evaluation ({gates}): {detail}")]
    GoldenFailed { task_id: String, gates: GateVector, detail: String },
}

impl EdaError {
    /// Tool or backend set up wrongly, as opposed to bad input data.
    pub fn is_configuration(&self) -> bool {
        matches!(self, EdaError::ToolMissing(_) | EdaError::Config(_))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateVector {
    pub syntax_ok: bool,
    pub synthesizable: bool,
    pub sim_pass: bool,
}

impl GateVector {
    pub fn all_pass(&self) -> bool {
        self.syntax_ok && self.sim_pass && self.synthesizable
    }
}

impl std::fmt::Display for GateVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "syntax={} sim={} synth={}", self.syntax_ok, self.sim_pass, self.synthesizable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    Syntax,
    Simulation,
    Synthesis,
}

impl Gate {
    fn name(self) -> &'static str {
        match self {
            Gate::Syntax => "syntax",
            Gate::Simulation => "simulation",
            Gate::Synthesis => "synthesis",
        }
    }
}

/// Result of running one gate.
#[derive(Debug, Clone, Default)]
pub struct GateRun {
    pub ok: bool,
    pub timed_out: bool,
    pub log: String,
}

#[derive(Debug, Clone, Default)]
pub struct SynthRun {
    pub ok: bool,
    pub timed_out: bool,
    pub stats: Option<SynthStats>,
    pub log: String,
}

/// Where one gate's captured output went.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateLog {
    pub gate: Gate,
    pub passed: bool,
    pub timed_out: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub gates: GateVector,
    pub stats: Option<SynthStats>,
    pub hqi: f64,
    pub logs: Vec<GateLog>,
}

impl EvalOutcome {
    pub fn no_candidate() -> Self {
        EvalOutcome { gates: GateVector::default(), stats: None, hqi: 0.0, logs: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.gates.all_pass()
    }
}

/// Runs the gates. `work` is a fresh directory owned by the current call.
pub trait EdaBackend: Send + Sync {
    fn check_syntax(&self, rtl: &str, work: &Path) -> Result<GateRun, EdaError>;
    fn simulate(&self, rtl: &str, testbench: &str, work: &Path) -> Result<GateRun, EdaError>;
    fn synthesize(&self, rtl: &str, work: &Path) -> Result<SynthRun, EdaError>;
    /// Identifies tool versions and technology library; baselines computed
    /// under a different fingerprint are never reused.
    fn fingerprint(&self) -> Result<String, EdaError>;
}

/// Backend plus scratch and log locations.
pub struct Evaluator {
    backend: Arc<dyn EdaBackend>,
    scratch_root: Option<PathBuf>,
    log_dir: Option<PathBuf>,
    invocations: AtomicUsize,
    fingerprint: OnceLock<String>,
}

impl Evaluator {
    pub fn new(backend: Arc<dyn EdaBackend>) -> Self {
        Evaluator {
            backend,
            scratch_root: None,
            log_dir: None,
            invocations: AtomicUsize::new(0),
            fingerprint: OnceLock::new(),
        }
    }

    /// Parent of the per-evaluation scratch directories (system temp dir
    /// otherwise).
    pub fn with_scratch_root(mut self, dir: impl Into<PathBuf>) -> Self {
        self.scratch_root = Some(dir.into());
        self
    }

    /// Gate logs are written under `dir/<attempt id>/<gate>.log`.
    pub fn with_log_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.log_dir = Some(dir.into());
        self
    }

    /// Gate invocations so far (each syntax, simulation or synthesis call
    /// counts once).
    pub fn invocations(&self) -> usize {
        self.invocations.load(Ordering::SeqCst)
    }

    pub fn fingerprint(&self) -> Result<String, EdaError> {
        if let Some(f) = self.fingerprint.get() {
            return Ok(f.clone());
        }
        let f = self.backend.fingerprint()?;
        Ok(self.fingerprint.get_or_init(|| f).clone())
    }

    fn scratch(&self) -> Result<tempfile::TempDir, EdaError> {
        let b = tempfile::Builder::new().prefix("hqisweep-").tempdir_in(
            self.scratch_root.clone().unwrap_or_else(std::env::temp_dir),
        );
        b.map_err(|e| EdaError::Io(format!("creating scratch directory: {e}")))
    }

    fn keep_log(&self, id: &str, gate: Gate, log: &str) -> Result<Option<String>, EdaError> {
        let Some(root) = &self.log_dir else { return Ok(None) };
        let dir = root.join(id);
        std::fs::create_dir_all(&dir).map_err(|e| EdaError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(format!("{}.log", gate.name()));
        std::fs::write(&path, log).map_err(|e| EdaError::Io(format!("{}: {e}", path.display())))?;
        Ok(Some(path.to_string_lossy().into_owned()))
    }

    /// Syntax, then simulation, then synthesis, stopping at the first
    /// failure.
    fn run_gates(&self, rtl: &str, testbench: &str, log_id: &str) -> Result<(GateVector, Option<SynthStats>, Vec<GateLog>), EdaError> {
        let scratch = self.scratch()?;
        let work = scratch.path();
        let mut gates = GateVector::default();
        let mut logs = Vec::new();

        self.invocations.fetch_add(1, Ordering::SeqCst);
        let syn = self.backend.check_syntax(rtl, work)?;
        logs.push(GateLog { gate: Gate::Syntax, passed: syn.ok, timed_out: syn.timed_out, path: self.keep_log(log_id, Gate::Syntax, &syn.log)? });
        if !syn.ok {
            return Ok((gates, None, logs));
        }
        gates.syntax_ok = true;

        self.invocations.fetch_add(1, Ordering::SeqCst);
        let sim = self.backend.simulate(rtl, testbench, work)?;
        logs.push(GateLog { gate: Gate::Simulation, passed: sim.ok, timed_out: sim.timed_out, path: self.keep_log(log_id, Gate::Simulation, &sim.log)? });
        if !sim.ok {
            return Ok((gates, None, logs));
        }
        gates.sim_pass = true;

        self.invocations.fetch_add(1, Ordering::SeqCst);
        let synth = self.backend.synthesize(rtl, work)?;
        let ok = synth.ok && synth.stats.is_some();
        logs.push(GateLog { gate: Gate::Synthesis, passed: ok, timed_out: synth.timed_out, path: self.keep_log(log_id, Gate::Synthesis, &synth.log)? });
        gates.synthesizable = ok;
        Ok((gates, if ok { synth.stats } else { None }, logs))
    }

    pub fn check_syntax(&self, rtl: &str) -> Result<GateRun, EdaError> {
        let scratch = self.scratch()?;
        self.invocations.fetch_add(1, Ordering::SeqCst);
        self.backend.check_syntax(rtl, scratch.path())
    }

    pub fn simulate(&self, rtl: &str, testbench: &str) -> Result<GateRun, EdaError> {
        let scratch = self.scratch()?;
        self.invocations.fetch_add(1, Ordering::SeqCst);
        self.backend.simulate(rtl, testbench, scratch.path())
    }

    pub fn synthesize(&self, rtl: &str) -> Result<SynthRun, EdaError> {
        let scratch = self.scratch()?;
        self.invocations.fetch_add(1, Ordering::SeqCst);
        self.backend.synthesize(rtl, scratch.path())
    }

    /// Runs the golden design through every gate. Uncached; see
    /// [`BaselineCache`].
    pub fn compute_golden_baseline(&self, task: &Task) -> Result<GoldenBaseline, EdaError> {
        let id = format!("golden-{}", sanitize(&task.id));
        let (gates, stats, logs) = self.run_gates(&task.golden_rtl, &task.testbench, &id)?;
        match stats {
            Some(stats) if gates.all_pass() => Ok(GoldenBaseline::from_stats(task.id.clone(), &stats)),
            _ => {
                let failed = logs.iter().find(|l| !l.passed).map(|l| l.gate.name()).unwrap_or("synthesis");
                Err(EdaError::GoldenFailed {
                    task_id: task.id.clone(),
                    gates,
                    detail: format!("{failed} gate failed"),
                })
            }
        }
    }

    /// Gates and scores one generated candidate. A missing candidate fails
    /// every gate.
    pub fn evaluate_attempt(
        &self,
        task: &Task,
        record: &GenerationRecord,
        baseline: &GoldenBaseline,
    ) -> Result<EvalOutcome, EdaError> {
        let Some(rtl) = record.extracted_rtl.as_deref() else {
            return Ok(EvalOutcome::no_candidate());
        };
        let (gates, stats, logs) = self.run_gates(rtl, &task.testbench, &attempt_id(record))?;
        let hqi = hqi_score(&gates, stats.as_ref(), baseline);
        Ok(EvalOutcome { gates, stats, hqi, logs })
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Stable directory name for an attempt's logs.
pub fn attempt_id(record: &GenerationRecord) -> String {
    let h = Sha256::digest(format!(
        "{}|{}|{}|{}",
        record.model,
        record.task_id,
        record.config.canonical(),
        record.sample_index
    ));
    format!("{}-{}", sanitize(&record.task_id), &hex::encode(h)[..16])
}
