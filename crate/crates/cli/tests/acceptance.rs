// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use hqisweep::analysis::{default_position, pareto_frontier, percentile, spearman_values, t_test_p, Bucket, ConfigScore, ParetoPoint};
use hqisweep::edaflow::{Evaluator, GateVector, ToolchainBackend, ToolchainConfig};
use hqisweep::generation::GenerationRecord;
use hqisweep::metrics::{cell_metrics, hqi_cost, hqi_score, pass_at_k, AttemptScore, SynthStats, TaskOutcomes};
use hqisweep::report::{self, Format, ReportInput, ReportKind};
use hqisweep::sweep::{build_grid, Store, SweepAxes, SweepGrid, SCHEMA_VERSION};
use hqisweep::taskset::{canonical_hash, dedup_tasks, normalize_rtl};
use hqisweep::{Benchmark, DecodingConfig, EvalOutcome, GoldenBaseline, JobKey, ResultRecord, Task};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Absolute tolerance for closed-form HQI and pass@k values.
const EXACT_TOL: f64 = 1e-12;
/// Table I prints three decimals.
const GAP_TOL: f64 = 0.001;
/// (ρ, expected p, tolerance) at n = 108.
const SPEARMAN_ANCHORS: [(f64, f64, f64); 3] = [(0.23, 0.016, 0.002), (0.15, 0.121, 0.005), (-0.05, 0.59, 0.03)];
const SPEARMAN_N: usize = 108;
const E2E_BUDGET: Duration = Duration::from_secs(30);

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{what}: got {got}, want {want} ± {tol}"))
}

fn cfg(t: f64, p: f64, r: f64, q: f64) -> DecodingConfig {
    DecodingConfig::new(t, p, r, q).expect("valid config")
}

// ---------------------------------------------------------------- HQI

fn hqi_suite() -> Outcome {
    let base = GoldenBaseline { task_id: "t".into(), area_ref: 10.0, delay_ref: 200.0, warnings_ref: 2 };
    let pass = GateVector { syntax_ok: true, synthesizable: true, sim_pass: true };
    // (label, area, delay, warnings, cost, hqi), all worked by hand.
    let cases: [(&str, f64, f64, u64, f64, f64); 11] = [
        ("parity", 10.0, 200.0, 2, 1.0, 100.0),
        ("doubling", 20.0, 400.0, 2, 2.0, 50.0),
        ("warnings only", 10.0, 200.0, 5, 1.3, 100.0 / 1.3),
        ("fewer warnings earn nothing", 10.0, 200.0, 0, 1.0, 100.0),
        ("cap", 5.0, 100.0, 2, 0.5, 100.0),
        ("cap at extreme", 0.1, 1.0, 0, 0.0075, 100.0),
        ("area only", 20.0, 200.0, 2, 1.5, 100.0 / 1.5),
        ("delay only", 10.0, 600.0, 2, 2.0, 50.0),
        ("mixed", 15.0, 100.0, 3, 1.1, 100.0 / 1.1),
        ("large", 100.0, 2000.0, 12, 11.0, 100.0 / 11.0),
        ("cheaper area, slower", 5.0, 500.0, 2, 1.5, 100.0 / 1.5),
    ];
    for (label, area, delay, warnings, cost, hqi) in cases {
        let s = SynthStats { area, delay, warnings };
        close(hqi_cost(&s, &base).map_err(|e| e.to_string())?, cost, EXACT_TOL, label)?;
        close(hqi_score(&pass, Some(&s), &base), hqi, EXACT_TOL, label)?;
    }
    let s = SynthStats { area: 10.0, delay: 200.0, warnings: 2 };
    for failed in [
        GateVector { syntax_ok: false, ..pass },
        GateVector { sim_pass: false, ..pass },
        GateVector { synthesizable: false, ..pass },
    ] {
        ensure(hqi_score(&failed, Some(&s), &base) == 0.0, || format!("gate failure {failed} must score 0"))?;
    }
    ensure(hqi_score(&pass, None, &base) == 0.0, || "missing stats must score 0".into())?;
    Ok(format!("{} closed-form cases plus 4 gate-failure cases", cases.len()))
}

// ---------------------------------------------------------------- pass@k

fn pass_at_k_oracle() -> Outcome {
    let mut checked = 0;
    for n in 1..=7usize {
        for c in 0..=n {
            for k in 1..=n {
                let (mut hit, mut total) = (0u32, 0u32);
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize == k {
                        total += 1;
                        // samples 0..c are the passing ones
                        hit += u32::from((0..c).any(|i| mask & (1 << i) != 0));
                    }
                }
                let got: f64 = pass_at_k(n, c, k).map_err(|e| e.to_string())?;
                close(got, f64::from(hit) / f64::from(total), EXACT_TOL, &format!("pass@{k} n={n} c={c}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (n, c, k) triples match subset enumeration"))
}

// ---------------------------------------------------------------- grid

/// (best, worst, printed gap) with their settings, in table order.
struct GapRow {
    label: &'static str,
    best: (f64, [f64; 4]),
    worst: (f64, [f64; 4]),
    gap: f64,
}

const TABLE_I: [GapRow; 12] = [
    GapRow { label: "GPT-OSS VE pass@1", best: (0.626, [0.4, 1.0, 1.0, -1.0]), worst: (0.503, [1.2, 1.0, 1.1, 0.0]), gap: 0.123 },
    GapRow { label: "GPT-OSS VE pass@5", best: (0.710, [0.4, 1.0, 1.1, -1.0]), worst: (0.658, [1.2, 1.0, 1.2, 1.0]), gap: 0.052 },
    GapRow { label: "GPT-OSS RTLLM pass@1", best: (0.575, [0.0, 0.7, 1.0, -1.0]), worst: (0.319, [0.8, 1.0, 1.0, 0.0]), gap: 0.255 },
    GapRow { label: "GPT-OSS RTLLM pass@5", best: (0.681, [0.8, 1.0, 1.1, -1.0]), worst: (0.553, [0.4, 0.4, 1.0, 0.0]), gap: 0.128 },
    GapRow { label: "Qwen-3.5 VE pass@1", best: (0.845, [0.0, 0.4, 1.1, -1.0]), worst: (0.600, [1.2, 1.0, 1.2, 0.0]), gap: 0.245 },
    GapRow { label: "Qwen-3.5 VE pass@5", best: (0.942, [1.2, 0.7, 1.1, 1.0]), worst: (0.858, [1.2, 1.0, 1.2, 1.0]), gap: 0.084 },
    GapRow { label: "Qwen-3.5 RTLLM pass@1", best: (0.596, [1.2, 0.4, 1.0, 0.0]), worst: (0.362, [0.4, 1.0, 1.1, 0.0]), gap: 0.234 },
    GapRow { label: "Qwen-3.5 RTLLM pass@5", best: (0.681, [0.0, 0.7, 1.2, 1.0]), worst: (0.575, [0.8, 1.0, 1.2, -1.0]), gap: 0.106 },
    GapRow { label: "GLM-5 VE pass@1", best: (0.671, [0.0, 0.4, 1.1, 0.0]), worst: (0.574, [1.2, 1.0, 1.2, 0.0]), gap: 0.097 },
    GapRow { label: "GLM-5 VE pass@5", best: (0.736, [0.8, 0.7, 1.2, 0.0]), worst: (0.684, [0.8, 0.4, 1.1, 1.0]), gap: 0.052 },
    GapRow { label: "GLM-5 RTLLM pass@1", best: (0.617, [0.8, 0.7, 1.0, 0.0]), worst: (0.447, [1.2, 1.0, 1.0, 0.0]), gap: 0.170 },
    GapRow { label: "GLM-5 RTLLM pass@5", best: (0.702, [1.2, 1.0, 1.2, 1.0]), worst: (0.596, [0.0, 0.7, 1.2, 1.0]), gap: 0.106 },
];

fn as_config(v: [f64; 4]) -> DecodingConfig {
    cfg(v[0], v[1], v[2], v[3])
}

fn grid_cardinality() -> Outcome {
    let sweep = build_grid(&SweepAxes::default(), false).map_err(|e| e.to_string())?;
    let full = build_grid(&SweepAxes::default(), true).map_err(|e| e.to_string())?;
    ensure(sweep.len() == 108, || format!("sweep grid has {} configs", sweep.len()))?;
    ensure(full.len() == 109, || format!("grid with default has {} configs", full.len()))?;
    ensure(full.configs.iter().filter(|c| c.is_default()).count() == 1, || "default must appear once".into())?;
    let members: BTreeSet<String> = sweep.configs.iter().map(|c| c.canonical()).collect();
    let named = [cfg(0.4, 1.0, 1.0, -1.0), cfg(0.0, 0.7, 1.0, -1.0), cfg(1.2, 0.4, 1.0, 0.0)];
    let tuples: Vec<DecodingConfig> =
        named.into_iter().chain(TABLE_I.iter().flat_map(|r| [as_config(r.best.1), as_config(r.worst.1)])).collect();
    for c in &tuples {
        ensure(members.contains(&c.canonical()), || format!("{c} is not in the sweep grid"))?;
    }
    Ok(format!("108 / 109 configs; all {} table tuples are members", tuples.len()))
}

// ---------------------------------------------------------------- gaps

const GAP_TASKS: usize = 1000;

fn synthetic_record(model: &str, config: DecodingConfig, task: &str, passed: bool) -> ResultRecord {
    let key = JobKey { model: model.into(), benchmark: "VerilogEval".into(), config, task_id: task.into(), sample_index: 0 };
    let generation = GenerationRecord {
        task_id: task.into(),
        model: model.into(),
        config,
        sample_index: 0,
        raw_response: String::new(),
        extracted_rtl: None,
        prompt_tokens: 0,
        completion_tokens: 0,
        tokens_estimated: true,
        ttft: 0.0,
        wall_time: 0.0,
        request_cost: 0.0,
        attempts: 1,
        error: None,
    };
    let outcome = if passed {
        EvalOutcome {
            gates: GateVector { syntax_ok: true, synthesizable: true, sim_pass: true },
            stats: Some(SynthStats { area: 1.0, delay: 1.0, warnings: 0 }),
            hqi: 100.0,
            logs: Vec::new(),
        }
    } else {
        EvalOutcome::no_candidate()
    };
    ResultRecord { schema_version: SCHEMA_VERSION, key, generation, outcome }
}

/// One model per table row over 1000 single-sample tasks, so a cell's pass
/// rate carries a three-decimal score exactly. Each row's best and worst
/// scores go through the store, aggregation and the gaps report.
fn table_i_gaps(scratch: &Path) -> Outcome {
    let tasks: Vec<Task> = (0..GAP_TASKS)
        .map(|i| {
            let rtl = format!("module t{i}(input a, output y); assign y = a; endmodule");
            Task::new(format!("t{i:04}"), Benchmark::VerilogEval, "p", rtl, "tb", None)
        })
        .collect();
    let set = dedup_tasks(tasks);
    ensure(set.len() == GAP_TASKS, || "synthetic tasks must be distinct".into())?;

    let path = scratch.join("table_i.jsonl");
    let mut store = Store::open(&path, 0).map_err(|e| e.to_string())?;
    for (i, row) in TABLE_I.iter().enumerate() {
        let model = format!("row{i:02}");
        let mid = (row.best.0 + row.worst.0) / 2.0;
        for (score, config) in [(row.best.0, as_config(row.best.1)), (row.worst.0, as_config(row.worst.1)), (mid, DecodingConfig::DEFAULT)] {
            let solved = (score * GAP_TASKS as f64).round() as usize;
            for (j, t) in set.tasks.iter().enumerate() {
                store.append(synthetic_record(&model, config, &t.id, j < solved)).map_err(|e| e.to_string())?;
            }
        }
    }
    store.flush().map_err(|e| e.to_string())?;

    let mut worst_err: f64 = 0.0;
    for (i, row) in TABLE_I.iter().enumerate() {
        let grid = SweepGrid {
            axes: SweepAxes::default(),
            configs: vec![as_config(row.best.1), as_config(row.worst.1), DecodingConfig::DEFAULT],
            include_default: true,
        };
        let input = ReportInput {
            store: &store,
            taskset: &set,
            models: vec![format!("row{i:02}")],
            grid,
            samples_per_task: 1,
            allow_partial: false,
            metrics: vec!["pass@1".into()],
        };
        let json = report::render(ReportKind::Gaps, Format::Json, &input).map_err(|e| e.to_string())?;
        let rows: Vec<serde_json::Value> = serde_json::from_str(&json).map_err(|e| e.to_string())?;
        ensure(rows.len() == 1, || format!("{}: expected one gaps row, got {}", row.label, rows.len()))?;
        let r = &rows[0];
        let num = |k: &str| r[k].as_f64().ok_or_else(|| format!("{}: column {k} is not numeric", row.label));
        close(num("best")?, row.best.0, EXACT_TOL, row.label)?;
        close(num("worst")?, row.worst.0, EXACT_TOL, row.label)?;
        ensure(r["best_config"] == as_config(row.best.1).to_string(), || format!("{}: best config {}", row.label, r["best_config"]))?;
        ensure(r["worst_config"] == as_config(row.worst.1).to_string(), || format!("{}: worst config {}", row.label, r["worst_config"]))?;
        let gap = num("gap")?;
        close(gap, row.gap, GAP_TOL + EXACT_TOL, &format!("{} gap", row.label))?;
        worst_err = worst_err.max((gap - row.gap).abs());
    }
    Ok(format!("12/12 rows within ±{GAP_TOL}; largest deviation {worst_err:.4}"))
}

// ---------------------------------------------------------------- default rank

/// 108 sweep scores with `better` of them above `default_value`, `equal`
/// of them tied with it and the rest below.
fn scores_around(default_value: f64, better: usize, equal: usize) -> Vec<ConfigScore<f64>> {
    let sweep = build_grid(&SweepAxes::default(), false).expect("default axes").configs;
    let mut out: Vec<ConfigScore<f64>> = sweep
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let v = if i < better {
                default_value + 0.001 * (i + 1) as f64
            } else if i < better + equal {
                default_value
            } else {
                default_value - 0.001 * (i + 1) as f64
            };
            ConfigScore::new(c, v)
        })
        .collect();
    out.push(ConfigScore::new(DecodingConfig::DEFAULT, default_value));
    out
}

fn table_ii_default_rank() -> Outcome {
    // Qwen-3.5 VE pass@5: default .710 is also the worst score.
    let sweep = build_grid(&SweepAxes::default(), false).map_err(|e| e.to_string())?.configs;
    let mut scores: Vec<ConfigScore<f64>> = sweep
        .iter()
        .enumerate()
        .map(|(i, c)| ConfigScore::new(*c, if i == 0 { 0.710 } else { 0.710 + (0.942 - 0.710) * i as f64 / 107.0 }))
        .collect();
    scores.push(ConfigScore::new(DecodingConfig::DEFAULT, 0.710));
    let g = default_position("pass@5", &scores).map_err(|e| e.to_string())?;
    ensure(g.default_rank == 109 && g.n == 109, || format!("Qwen VE pass@5 default ranked {}/{}", g.default_rank, g.n))?;
    close(g.worst.value, 0.710, EXACT_TOL, "worst")?;
    close(g.gap_w, 0.232, 1e-9, "gap_w")?;
    close(g.gap_d, 0.232, 1e-9, "gap_d")?;
    ensure(g.bucket == Bucket::Bottom, || format!("rank 109 bucket {}", g.bucket))?;

    // (rank, printed percentile, band) from the table's colored cells.
    let bands = [(4, 97.2, Bucket::Top), (28, 75.0, Bucket::Good), (46, 58.3, Bucket::Mid), (96, 12.0, Bucket::Bottom), (109, 0.0, Bucket::Bottom)];
    for (rank, pct, band) in bands {
        // Half the configs ahead of the default tie with it, to exercise the
        // tie rule at every rank.
        let ahead = rank - 1;
        let ties = ahead / 2;
        let g = default_position("m", &scores_around(0.5, ahead - ties, ties)).map_err(|e| e.to_string())?;
        ensure(g.default_rank == rank, || format!("expected rank {rank}, got {}", g.default_rank))?;
        close(g.percentile, percentile::<f64>(rank, 109), EXACT_TOL, "percentile")?;
        close(g.percentile, pct, 0.05, &format!("rank {rank} percentile"))?;
        ensure(g.bucket == band, || format!("rank {rank}: bucket {} instead of {}", g.bucket, band))?;
    }
    Ok("default = worst ranks 109/109; ranks 4, 28, 46, 96, 109 land in top, good, mid, bottom, bottom".into())
}

// ---------------------------------------------------------------- spearman

/// A permutation of 0..n whose Spearman ρ against the identity is as close
/// to `rho` as integer rank sums allow.
fn permutation_with_rho(n: usize, rho: f64, rng: &mut StdRng) -> Vec<f64> {
    let scale = (n * (n * n - 1)) as f64 / 6.0;
    // Σd² is always even.
    let target = (((1.0 - rho) * scale / 2.0).round() * 2.0) as i64;
    let mut perm: Vec<i64> = (0..n as i64).collect();
    let mut sum: i64 = 0;
    for _ in 0..2_000_000 {
        if sum == target {
            break;
        }
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (pi, pj) = (perm[i], perm[j]);
        let (ii, jj) = (i as i64, j as i64);
        let delta = (pj - ii).pow(2) + (pi - jj).pow(2) - (pi - ii).pow(2) - (pj - jj).pow(2);
        if (sum + delta - target).abs() < (sum - target).abs() {
            perm.swap(i, j);
            sum += delta;
        }
    }
    perm.into_iter().map(|v| v as f64).collect()
}

fn spearman_anchors() -> Outcome {
    let mut rng = StdRng::seed_from_u64(108);
    let identity: Vec<f64> = (0..SPEARMAN_N).map(|i| i as f64).collect();
    let mut details = Vec::new();
    for (rho, want, tol) in SPEARMAN_ANCHORS {
        let p = t_test_p(rho, SPEARMAN_N);
        close(p, want, tol, &format!("p at rho={rho}"))?;
        let perm = permutation_with_rho(SPEARMAN_N, rho, &mut rng);
        let s = spearman_values(&identity, &perm).map_err(|e| e.to_string())?;
        close(s.rho, rho, 1e-4, "constructed rho")?;
        close(s.p, want, tol, &format!("p from ranked data at rho={rho}"))?;
        details.push(format!("ρ={rho:+.2} → p={p:.4}"));
    }
    Ok(details.join(", "))
}

// ---------------------------------------------------------------- pareto

fn pareto_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let start = Instant::now();
    for set in 0..1000 {
        let n = rng.gen_range(0..=200);
        // Coarse coordinates so ties and duplicates are common.
        let levels = rng.gen_range(2..40);
        let pts: Vec<ParetoPoint<f64, usize>> = (0..n)
            .map(|i| ParetoPoint::new(rng.gen_range(0..levels) as f64 / levels as f64, rng.gen_range(0..levels) as f64, i))
            .collect();
        let got: Vec<usize> = pareto_frontier(&pts).into_iter().map(|p| p.label).collect();
        let want: Vec<usize> = pts
            .iter()
            .filter(|p| !pts.iter().any(|q| q.x >= p.x && q.y >= p.y && (q.x > p.x || q.y > p.y)))
            .map(|p| p.label)
            .collect();
        ensure(got == want, || format!("set {set}: frontier {got:?} != brute force {want:?}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok("1000 random sets match the O(n²) brute force".into())
}

// ---------------------------------------------------------------- metrics invariants

fn random_cell(rng: &mut StdRng) -> (Vec<Task>, BTreeMap<String, TaskOutcomes<f64>>) {
    let n_tasks = rng.gen_range(1..10);
    let samples = rng.gen_range(1..8);
    let mut tasks = Vec::new();
    let mut outcomes = BTreeMap::new();
    for i in 0..n_tasks {
        let mut t = Task::new(format!("t{i}"), Benchmark::Rtllm, "", "module m; endmodule", "", None);
        t.complexity_weight = rng.gen_range(1..60) as f64;
        let attempts = (0..samples)
            .map(|_| {
                let passed = rng.gen_bool(0.4);
                AttemptScore { passed, hqi: if passed { rng.gen_range(1.0..=100.0) } else { 0.0 } }
            })
            .collect();
        outcomes.insert(t.id.clone(), TaskOutcomes { task_id: t.id.clone(), attempts });
        tasks.push(t);
    }
    (tasks, outcomes)
}

fn metrics_invariants() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    for case in 0..1000 {
        let (tasks, outcomes) = random_cell(&mut rng);
        let m = cell_metrics(&tasks, &outcomes).map_err(|e| e.to_string())?;
        ensure(m.expected_hqi <= m.global_hqi + 1e-9, || format!("case {case}: expected {} > global {}", m.expected_hqi, m.global_hqi))?;

        let scale = rng.gen_range(0.001..1000.0);
        let scaled: Vec<Task> = tasks
            .iter()
            .cloned()
            .map(|mut t| {
                t.complexity_weight *= scale;
                t
            })
            .collect();
        let s = cell_metrics(&scaled, &outcomes).map_err(|e| e.to_string())?;
        for (a, b, what) in [(m.global_hqi, s.global_hqi, "global"), (m.expected_hqi, s.expected_hqi, "expected"), (m.coverage, s.coverage, "coverage")] {
            ensure((a - b).abs() <= 1e-9 * a.abs().max(1.0), || format!("case {case}: {what} moved under weight scaling ({a} vs {b})"))?;
        }
        ensure(m.pass_at.values().zip(m.pass_at.values().skip(1)).all(|(a, b)| a <= b), || {
            format!("case {case}: pass@k not monotone in k: {:?}", m.pass_at)
        })?;
    }
    for n in 1..=30usize {
        for k in 1..=n {
            let col: Vec<f64> = (0..=n).map(|c| pass_at_k(n, c, k).unwrap()).collect();
            ensure(col.windows(2).all(|w| w[0] <= w[1]), || format!("pass@{k} not monotone in c at n={n}"))?;
        }
    }
    Ok("1000 random cells: expected ≤ global, weight-scale invariant, pass@k monotone in k and c".into())
}

// ---------------------------------------------------------------- end to end

fn data_lines(path: &Path) -> usize {
    std::fs::read_to_string(path).map(|s| s.lines().count().saturating_sub(1)).unwrap_or(0)
}

const REPORT_KINDS: [&str; 9] = ["gaps", "default-rank", "spearman", "pareto", "distribution", "correlation", "landscape", "categories", "efficiency"];

fn all_reports(ws: &common::Workspace) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for kind in REPORT_KINDS {
        for fmt in ["table", "csv", "json"] {
            let o = ws.cmd(&["report", kind, "--format", fmt]);
            ensure(o.status.success(), || format!("report {kind} {fmt}: {}", common::stderr(&o)))?;
            out.insert(format!("{kind}.{fmt}"), o.stdout);
        }
    }
    Ok(out)
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let ws = common::workspace(40);
    for step in [&["ingest"][..], &["baseline"]] {
        let o = ws.cmd(step);
        ensure(o.status.success(), || format!("{step:?}: {}", common::stderr(&o)))?;
    }

    let cfg = ws.config();
    let mut child = Command::new(env!("CARGO_BIN_EXE_hqisweep"))
        .args(["sweep", "run", "--config", cfg.to_str().unwrap()])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let planned = ws.planned_jobs();
    let kill_at = planned / 4;
    while data_lines(&ws.store()) < kill_at {
        if child.try_wait().map_err(|e| e.to_string())?.is_some() {
            return Err("sweep finished before it could be interrupted".into());
        }
        ensure(start.elapsed() < E2E_BUDGET, || "timed out waiting for progress".into())?;
        std::thread::sleep(Duration::from_millis(5));
    }
    child.kill().map_err(|e| e.to_string())?;
    child.wait().map_err(|e| e.to_string())?;
    let at_kill = data_lines(&ws.store());
    ensure(at_kill < planned, || "kill landed after completion".into())?;

    let o = ws.cmd(&["sweep", "resume"]);
    ensure(o.status.success(), || format!("resume: {}", common::stderr(&o)))?;
    let summary = common::stdout(&o);

    let store = Store::open_read_only(ws.store()).map_err(|e| e.to_string())?;
    ensure(store.len() == planned, || format!("store holds {} of {planned} jobs", store.len()))?;
    ensure(data_lines(&ws.store()) == planned, || "store has duplicate or stray lines".into())?;
    let keys: BTreeSet<String> = store.records().map(|r| r.key.canonical()).collect();
    ensure(keys.len() == planned, || "duplicate keys".into())?;

    let first = all_reports(&ws)?;
    let second = all_reports(&ws)?;
    ensure(first == second, || "reports differ between invocations".into())?;

    // The interrupted run must match an uninterrupted one on every report
    // that does not measure wall-clock time.
    let clean = common::workspace(0);
    for step in [&["ingest"][..], &["baseline"], &["sweep", "run"]] {
        let o = clean.cmd(step);
        ensure(o.status.success(), || format!("{step:?}: {}", common::stderr(&o)))?;
    }
    let reference = all_reports(&clean)?;
    for (name, bytes) in &first {
        if !name.starts_with("efficiency") {
            ensure(reference[name] == *bytes, || format!("{name} differs from an uninterrupted run"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < E2E_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{planned} jobs, killed at {at_kill}, resume [{}], 27 reports byte-stable, {:.1} s",
        summary.trim(),
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- real tools

fn on_path(tool: &str) -> bool {
    std::env::var_os("PATH")
        .map(|p| std::env::split_paths(&p).any(|d| d.join(tool).is_file()))
        .unwrap_or(false)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toolchain").join(name)
}

fn real_toolchain() -> Outcome {
    let missing: Vec<&str> = ["iverilog", "vvp", "yosys"].into_iter().filter(|t| !on_path(t)).collect();
    if !missing.is_empty() {
        return Ok(format!("skipped: {} not on PATH (optional gate)", missing.join(", ")));
    }
    let start = Instant::now();
    let read = |n: &str| std::fs::read_to_string(fixture(n)).map_err(|e| e.to_string());
    let (golden, tb, mutant) = (read("adder.v")?, read("adder_tb.v")?, read("adder_inverted.v")?);
    let cfg = ToolchainConfig { liberty: Some(fixture("cells.lib")), ..Default::default() };
    let evaluator = Evaluator::new(Arc::new(ToolchainBackend::new(cfg).map_err(|e| e.to_string())?));
    let task = Task::new("adder", Benchmark::VerilogEval, "1-bit full adder", golden.clone(), tb, None);
    let baseline = evaluator.compute_golden_baseline(&task).map_err(|e| e.to_string())?;
    let attempt = |rtl: &str| {
        let mut r = synthetic_record("smoke", DecodingConfig::DEFAULT, "adder", false).generation;
        r.extracted_rtl = Some(rtl.to_string());
        evaluator.evaluate_attempt(&task, &r, &baseline).map_err(|e| e.to_string())
    };
    let own = attempt(&golden)?;
    ensure(own.passed(), || format!("golden gates {}", own.gates))?;
    close(own.hqi, 100.0, EXACT_TOL, "golden self-score")?;
    let bad = attempt(&mutant)?;
    ensure(bad.gates.syntax_ok && !bad.gates.sim_pass, || format!("mutant gates {}", bad.gates))?;
    ensure(bad.hqi == 0.0, || format!("mutant scored {}", bad.hqi))?;
    ensure(start.elapsed() < Duration::from_secs(120), || "took longer than 2 min".into())?;
    Ok(format!("golden HQI 100 (area {}, delay {}), mutant fails simulation", baseline.area_ref, baseline.delay_ref))
}

// ---------------------------------------------------------------- dedup

fn mutate(tokens: &[&str], rng: &mut StdRng) -> String {
    let mut out = String::new();
    for t in tokens {
        match rng.gen_range(0..6) {
            0 => out.push_str(&format!(" // note {}\n", rng.gen_range(0..1000))),
            1 => out.push_str(&format!(" /* c{} */ ", rng.gen_range(0..1000))),
            2 => out.push_str("\n\t  "),
            3 => out.push_str("   "),
            _ => out.push(' '),
        }
        out.push_str(t);
    }
    if rng.gen_bool(0.5) {
        out.push_str("\n// trailing\n");
    }
    out
}

fn dedup_normalization() -> Outcome {
    let designs: [&[&str]; 3] = [
        &["module", "m", "(", "input", "a", ",", "output", "y", ")", ";", "assign", "y", "=", "~", "a", ";", "endmodule"],
        &["module", "m", "(", "input", "a", ",", "output", "y", ")", ";", "assign", "y", "=", "a", ";", "endmodule"],
        &["module", "r", ";", "reg", "q", ";", "always", "@", "(", "*", ")", "q", "=", "1'b0", ";", "endmodule"],
    ];
    let mut rng = StdRng::seed_from_u64(500);
    let mut tasks = Vec::new();
    for i in 0..500 {
        let d = i % designs.len();
        let text = mutate(designs[d], &mut rng);
        let once = normalize_rtl(&text);
        ensure(normalize_rtl(&once) == once, || format!("mutation {i}: normalization not idempotent"))?;
        ensure(once == designs[d].join(" "), || format!("mutation {i}: canonical text {once:?}"))?;
        ensure(canonical_hash(&text) == canonical_hash(&designs[d].join("\n")), || format!("mutation {i}: hash differs"))?;
        let bench = if rng.gen_bool(0.5) { Benchmark::VerilogEval } else { Benchmark::Rtllm };
        tasks.push(Task::new(format!("m{i:03}"), bench, "", text, "", None));
    }
    let set = dedup_tasks(tasks);
    ensure(set.len() == designs.len(), || format!("{} canonical tasks remain", set.len()))?;
    ensure(set.alias_map.len() == 500 - designs.len(), || format!("{} aliases", set.alias_map.len()))?;
    Ok("500 mutations: idempotent, comment/whitespace-blind, dedup keeps 3 tasks".into())
}

// ---------------------------------------------------------------- driver

fn main() {
    let scratch = tempfile::tempdir().expect("scratch directory");
    let criteria: Vec<Criterion<'_>> = vec![
        ("HQI formula suite", Box::new(hqi_suite)),
        ("pass@k oracle equivalence", Box::new(pass_at_k_oracle)),
        ("grid cardinality", Box::new(grid_cardinality)),
        ("gap arithmetic vs. Table I", Box::new(|| table_i_gaps(scratch.path()))),
        ("default-rank tie rule vs. Table II", Box::new(table_ii_default_rank)),
        ("Spearman p-value anchors", Box::new(spearman_anchors)),
        ("Pareto oracle", Box::new(pareto_oracle)),
        ("metrics invariants", Box::new(metrics_invariants)),
        ("end-to-end stub run", Box::new(end_to_end)),
        ("real-toolchain smoke", Box::new(real_toolchain)),
        ("dedup/normalization", Box::new(dedup_normalization)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{ms} ms]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{ms} ms]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
