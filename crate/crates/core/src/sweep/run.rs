// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use crossbeam_channel::bounded;
use serde::{Deserialize, Serialize};

use super::{JobKey, ResultRecord, Store, SweepError, SCHEMA_VERSION};
use crate::edaflow::{EdaError, Evaluator};
use crate::generation::{GenerationRecord, Generator};
use crate::taskset::Task;
use crate::GoldenBaseline;

/// Everything a job needs besides its key.
pub struct ExecContext<'a> {
    /// Keyed by model name.
    pub generators: BTreeMap<String, Generator>,
    pub evaluator: &'a Evaluator,
    /// Keyed by task id.
    pub tasks: BTreeMap<String, &'a Task>,
    /// Keyed by task id.
    pub baselines: BTreeMap<String, GoldenBaseline>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecOptions {
    /// Concurrent generation requests.
    pub generation_workers: usize,
    /// Concurrent evaluations (each may run external tools).
    pub eval_workers: usize,
    /// Re-run jobs already in the store; the newer record supersedes.
    pub force: bool,
    /// Stop after this many records have been written.
    pub halt_after: Option<usize>,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions { generation_workers: 4, eval_workers: 2, force: false, halt_after: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub planned: usize,
    /// Records written by this run.
    pub executed: usize,
    /// Jobs already in the store.
    pub skipped: usize,
    /// Written records whose generation failed, plus jobs whose evaluation
    /// errored and stay pending.
    pub failed: usize,
    pub halted: bool,
}

enum Evaluated {
    Record(Box<ResultRecord>),
    /// Evaluation error that leaves the job pending.
    Pending(JobKey, EdaError),
}

/// Runs every pending job of `plan`: generation and evaluation in two
/// bounded worker pools joined by a bounded queue, with this thread as the
/// only writer to `store`.
///
/// Configuration errors from the evaluation backend abort the run; other
/// per-job failures do not.
pub fn execute(
    plan: &[JobKey],
    ctx: &ExecContext<'_>,
    store: &mut Store,
    options: &ExecOptions,
) -> Result<RunSummary, SweepError> {
    let pending: Vec<&JobKey> = plan.iter().filter(|k| options.force || !store.contains(k)).collect();
    let mut summary = RunSummary { planned: plan.len(), skipped: plan.len() - pending.len(), ..Default::default() };
    for key in &pending {
        if !ctx.generators.contains_key(&key.model) {
            return Err(SweepError::Domain(format!("no endpoint configured for model `{}`", key.model)));
        }
        if !ctx.tasks.contains_key(&key.task_id) || !ctx.baselines.contains_key(&key.task_id) {
            return Err(SweepError::Domain(format!("no task or baseline for `{}`", key.task_id)));
        }
    }
    if pending.is_empty() {
        return Ok(summary);
    }

    let gen_workers = options.generation_workers.max(1);
    let eval_workers = options.eval_workers.max(1);
    let stop = AtomicBool::new(false);
    let fatal: Mutex<Option<SweepError>> = Mutex::new(None);

    let (job_tx, job_rx) = bounded::<&JobKey>(gen_workers * 2);
    let (gen_tx, gen_rx) = bounded::<(&JobKey, GenerationRecord)>(eval_workers * 2);
    let (out_tx, out_rx) = bounded::<Evaluated>(eval_workers * 2);

    std::thread::scope(|s| {
        let stop = &stop;
        let fatal = &fatal;

        s.spawn(move || {
            for key in pending {
                if stop.load(Ordering::SeqCst) || job_tx.send(key).is_err() {
                    break;
                }
            }
        });

        for _ in 0..gen_workers {
            let job_rx = job_rx.clone();
            let gen_tx = gen_tx.clone();
            s.spawn(move || {
                for key in job_rx {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let generator = &ctx.generators[&key.model];
                    let task = ctx.tasks[&key.task_id];
                    let record = generator
                        .generate(task, &key.config, key.sample_index)
                        .unwrap_or_else(|e| failed_generation(key, e.to_string()));
                    if gen_tx.send((key, record)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(job_rx);
        drop(gen_tx);

        for _ in 0..eval_workers {
            let gen_rx = gen_rx.clone();
            let out_tx = out_tx.clone();
            s.spawn(move || {
                for (key, generation) in gen_rx {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let task = ctx.tasks[&key.task_id];
                    let baseline = &ctx.baselines[&key.task_id];
                    let msg = match ctx.evaluator.evaluate_attempt(task, &generation, baseline) {
                        Ok(outcome) => Evaluated::Record(Box::new(ResultRecord {
                            schema_version: SCHEMA_VERSION,
                            key: key.clone(),
                            generation,
                            outcome,
                        })),
                        Err(e) if e.is_configuration() => {
                            stop.store(true, Ordering::SeqCst);
                            fatal.lock().expect("fatal slot").get_or_insert(SweepError::Eda(e));
                            break;
                        }
                        Err(e) => Evaluated::Pending(key.clone(), e),
                    };
                    if out_tx.send(msg).is_err() {
                        break;
                    }
                }
            });
        }
        drop(gen_rx);
        drop(out_tx);

        for msg in out_rx.iter() {
            match msg {
                Evaluated::Record(r) => {
                    let failed = r.generation.failed();
                    if let Err(e) = store.append(*r) {
                        stop.store(true, Ordering::SeqCst);
                        fatal.lock().expect("fatal slot").get_or_insert(e);
                        break;
                    }
                    summary.executed += 1;
                    summary.failed += usize::from(failed);
                    if options.halt_after.is_some_and(|n| summary.executed >= n) {
                        summary.halted = true;
                        stop.store(true, Ordering::SeqCst);
                        break;
                    }
                }
                Evaluated::Pending(key, e) => {
                    log::error!("{key}: evaluation failed, left pending: {e}");
                    summary.failed += 1;
                }
            }
        }
        drop(out_rx);
    });

    if let Some(e) = fatal.into_inner().expect("fatal slot") {
        return Err(e);
    }
    store.flush()?;
    if options.force {
        store.compact()?;
    }
    Ok(summary)
}

fn failed_generation(key: &JobKey, error: String) -> GenerationRecord {
    GenerationRecord {
        task_id: key.task_id.clone(),
        model: key.model.clone(),
        config: key.config,
        sample_index: key.sample_index,
        raw_response: String::new(),
        extracted_rtl: None,
        prompt_tokens: 0,
        completion_tokens: 0,
        tokens_estimated: true,
        ttft: 0.0,
        wall_time: 0.0,
        request_cost: 0.0,
        attempts: 0,
        error: Some(error),
    }
}

