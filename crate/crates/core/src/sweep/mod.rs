// SPDX-License-Identifier: Apache-2.0

//! The decoding-hyperparameter grid, the job matrix, crash-safe result
//! persistence and per-cell aggregation.

mod run;
mod store;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edaflow::{EdaError, EvalOutcome};
use crate::generation::{DecodingConfig, GenerationRecord};
use crate::metrics::{cell_metrics, AttemptScore, MetricsError, TaskOutcomes};
use crate::taskset::{Benchmark, Task, TaskSet};
use crate::CellMetrics;

pub use run::{execute, ExecContext, ExecOptions, RunSummary};
pub use store::{Store, StoreHeader};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{0}")]
    Domain(String),
    #[error("result store {path}: {message}")]
    Store { path: String, message: String },
    #[error("incomplete data, {} missing record(s): {}", .0.len(), preview(.0))]
    Incomplete(Vec<String>),
    #[error(transparent)]
    Eda(#[from] EdaError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

fn preview(keys: &[String]) -> String {
    let mut s = keys.iter().take(10).cloned().collect::<Vec<_>>().join(", ");
    if keys.len() > 10 {
        s.push_str(&format!(", ... ({} more)", keys.len() - 10));
    }
    s
}

/// Values of each decoding axis.
///
/// The defaults are temperature {0, 0.4, 0.8, 1.2}, top_p {0.4, 0.7, 1.0},
/// repetition penalty {1.0, 1.1, 1.2} and presence penalty {-1, 0, 1}: 108
/// combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub temperature: Vec<f64>,
    pub top_p: Vec<f64>,
    pub repetition_penalty: Vec<f64>,
    pub presence_penalty: Vec<f64>,
}

impl Default for SweepAxes {
    fn default() -> Self {
        SweepAxes {
            temperature: vec![0.0, 0.4, 0.8, 1.2],
            top_p: vec![0.4, 0.7, 1.0],
            repetition_penalty: vec![1.0, 1.1, 1.2],
            presence_penalty: vec![-1.0, 0.0, 1.0],
        }
    }
}

impl SweepAxes {
    pub fn named(&self) -> [(&'static str, &[f64]); 4] {
        [
            ("temperature", &self.temperature),
            ("top_p", &self.top_p),
            ("repetition_penalty", &self.repetition_penalty),
            ("presence_penalty", &self.presence_penalty),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axes: SweepAxes,
    pub configs: Vec<DecodingConfig>,
    pub include_default: bool,
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
}

/// Cartesian product of the axes, temperature varying slowest. Repeated
/// values collapse; the default configuration is appended when requested
/// and not already a grid point.
pub fn build_grid(axes: &SweepAxes, include_default: bool) -> Result<SweepGrid, SweepError> {
    for (name, values) in axes.named() {
        if values.is_empty() {
            return Err(SweepError::Domain(format!("sweep axis `{name}` is empty")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(SweepError::Domain(format!("sweep axis `{name}` has non-finite value {v}")));
        }
    }
    let mut seen = HashSet::new();
    let mut configs = Vec::new();
    for &t in &axes.temperature {
        for &p in &axes.top_p {
            for &r in &axes.repetition_penalty {
                for &q in &axes.presence_penalty {
                    let c = DecodingConfig { temperature: t, top_p: p, repetition_penalty: r, presence_penalty: q };
                    c.validate().map_err(|e| SweepError::Domain(e.to_string()))?;
                    if seen.insert(c) {
                        configs.push(c);
                    }
                }
            }
        }
    }
    if include_default && seen.insert(DecodingConfig::DEFAULT) {
        configs.push(DecodingConfig::DEFAULT);
    }
    Ok(SweepGrid { axes: axes.clone(), configs, include_default })
}

/// Identity of one generation-plus-evaluation job.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JobKey {
    pub model: String,
    pub benchmark: String,
    pub config: DecodingConfig,
    pub task_id: String,
    pub sample_index: u32,
}

impl JobKey {
    /// `model|benchmark|config|task|sample` with fixed-precision config
    /// values; stable across processes.
    pub fn canonical(&self) -> String {
        format!(
            "{}|{}|{}|{}|{}",
            self.model,
            self.benchmark,
            self.config.canonical(),
            self.task_id,
            self.sample_index
        )
    }
}

impl fmt::Display for JobKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// One persisted job result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub key: JobKey,
    pub generation: GenerationRecord,
    pub outcome: EvalOutcome,
}

/// Every (model, benchmark, config, task, sample) combination, in that
/// nesting order.
pub fn plan_jobs(
    models: &[String],
    benchmarks: &[Benchmark],
    taskset: &TaskSet,
    grid: &SweepGrid,
    samples_per_task: u32,
) -> Result<Vec<JobKey>, SweepError> {
    if samples_per_task == 0 {
        return Err(SweepError::Domain("samples_per_task must be at least 1".into()));
    }
    let per_bench: Vec<(&Benchmark, Vec<&Task>)> =
        benchmarks.iter().map(|b| (b, taskset.tasks_of(b).collect())).collect();
    if per_bench.iter().all(|(_, ts)| ts.is_empty()) {
        return Err(SweepError::Domain("the task set has no tasks for the selected benchmarks".into()));
    }
    let mut jobs = Vec::new();
    for model in models {
        for (bench, tasks) in &per_bench {
            for config in &grid.configs {
                for task in tasks {
                    for s in 0..samples_per_task {
                        jobs.push(JobKey {
                            model: model.clone(),
                            benchmark: bench.name().to_string(),
                            config: *config,
                            task_id: task.id.clone(),
                            sample_index: s,
                        });
                    }
                }
            }
        }
    }
    Ok(jobs)
}

/// Metrics of one (model, benchmark, config) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub metrics: CellMetrics,
    /// Built from an incomplete cell under `allow_partial`.
    pub partial: bool,
    pub missing: Vec<String>,
}

/// Groups the cell's records by task and computes its metrics. Missing
/// records are an error unless `allow_partial`, in which case tasks without
/// any record are left out and the result is flagged.
pub fn aggregate(
    store: &Store,
    taskset: &TaskSet,
    model: &str,
    benchmark: &Benchmark,
    config: &DecodingConfig,
    samples_per_task: u32,
    allow_partial: bool,
) -> Result<CellAggregate, SweepError> {
    let mut missing = Vec::new();
    let mut outcomes = BTreeMap::new();
    let mut tasks = Vec::new();
    for task in taskset.tasks_of(benchmark) {
        let mut attempts = Vec::new();
        for s in 0..samples_per_task {
            let key = JobKey {
                model: model.to_string(),
                benchmark: benchmark.name().to_string(),
                config: *config,
                task_id: task.id.clone(),
                sample_index: s,
            };
            match store.get(&key) {
                Some(r) => attempts.push(AttemptScore { passed: r.outcome.passed(), hqi: r.outcome.hqi }),
                None => missing.push(key.canonical()),
            }
        }
        if !attempts.is_empty() {
            tasks.push(task);
            outcomes.insert(task.id.clone(), TaskOutcomes { task_id: task.id.clone(), attempts });
        }
    }
    if !missing.is_empty() && !allow_partial {
        return Err(SweepError::Incomplete(missing));
    }
    let metrics = cell_metrics(&tasks, &outcomes)?;
    Ok(CellAggregate { metrics, partial: !missing.is_empty(), missing })
}
