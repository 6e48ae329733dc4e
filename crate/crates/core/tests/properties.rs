// SPDX-License-Identifier: Apache-2.0

//! Randomized invariants checked against independent oracles.

use std::collections::BTreeMap;

use hqisweep::analysis::{pareto_frontier, spearman_values, ParetoPoint};
use hqisweep::generation::extract_first_fenced_block;
use hqisweep::metrics::{cell_metrics, expected_hqi, global_hqi, pass_at_k, AttemptScore, TaskOutcomes};
use hqisweep::taskset::{build_dependency_graph, canonical_hash, dedup_tasks, normalize_rtl};
use hqisweep::{Benchmark, Task};
use proptest::prelude::*;

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}"
}

/// Token soup without quotes or comment openers.
fn rtl_tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop_oneof![ident(), Just(";".to_string()), Just("=".into()), Just("(".into()), Just(")".into()), Just("+".into())],
        1..30,
    )
}

fn whitespace() -> impl Strategy<Value = String> {
    prop::collection::vec(prop_oneof![Just(" "), Just("\t"), Just("\n"), Just("  \n  ")], 1..3).prop_map(|v| v.concat())
}

fn comment() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z ]{0,10}".prop_map(|c| format!("// {c}\n")),
        "[a-z ]{0,10}".prop_map(|c| format!("/* {c} */")),
    ]
}

/// Joins tokens with random whitespace and interleaved comments.
fn decorate(tokens: &[String], seps: &[(String, Option<String>)]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        let (ws, c) = &seps[i % seps.len()];
        out.push_str(ws);
        if let Some(c) = c {
            out.push_str(c);
            out.push_str(ws);
        }
        out.push_str(t);
    }
    out
}

fn binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exhaustive pass@k: the fraction of k-subsets of n samples that contain a
/// passing one.
fn pass_at_k_enumerated(n: usize, c: usize, k: usize) -> f64 {
    let (mut hit, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        total += 1;
        if (0..c).any(|i| mask & (1 << i) != 0) {
            hit += 1;
        }
    }
    hit as f64 / total as f64
}

fn dominated(p: (f64, f64), q: (f64, f64)) -> bool {
    q.0 >= p.0 && q.1 >= p.1 && (q.0 > p.0 || q.1 > p.1)
}

fn outcomes_strategy() -> impl Strategy<Value = Vec<(f64, Vec<(bool, f64)>)>> {
    prop::collection::vec(
        (1.0..50.0f64, prop::collection::vec((any::<bool>(), 0.0..100.0f64), 5)),
        1..8,
    )
}

fn tasks_and_outcomes(spec: &[(f64, Vec<(bool, f64)>)]) -> (Vec<Task>, BTreeMap<String, TaskOutcomes<f64>>) {
    let mut tasks = Vec::new();
    let mut outcomes = BTreeMap::new();
    for (i, (w, attempts)) in spec.iter().enumerate() {
        let mut t = Task::new(format!("t{i}"), Benchmark::VerilogEval, "", "module m; endmodule", "", None);
        t.complexity_weight = *w;
        let attempts = attempts
            .iter()
            .map(|&(passed, h)| AttemptScore { passed, hqi: if passed { h } else { 0.0 } })
            .collect();
        outcomes.insert(t.id.clone(), TaskOutcomes { task_id: t.id.clone(), attempts });
        tasks.push(t);
    }
    (tasks, outcomes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn normalization_is_idempotent(text in "[ -~\n\t]{0,120}") {
        let once = normalize_rtl(&text);
        prop_assert_eq!(normalize_rtl(&once), once.clone());
    }

    #[test]
    fn comments_and_whitespace_do_not_change_hash(
        tokens in rtl_tokens(),
        seps_a in prop::collection::vec((whitespace(), prop::option::of(comment())), 1..4),
        seps_b in prop::collection::vec((whitespace(), prop::option::of(comment())), 1..4),
    ) {
        let a = decorate(&tokens, &seps_a);
        let b = decorate(&tokens, &seps_b);
        prop_assert_eq!(canonical_hash(&a), canonical_hash(&b));
        prop_assert_eq!(normalize_rtl(&a), tokens.join(" "));
    }

    #[test]
    fn dedup_keeps_one_task_per_canonical_text(
        picks in prop::collection::vec((0usize..4, any::<bool>(), whitespace()), 1..12),
    ) {
        let bodies = ["assign y = a;", "assign y = b;", "assign y = a & b;", "assign y = a | b;"];
        let tasks: Vec<Task> = picks
            .iter()
            .enumerate()
            .map(|(i, (b, ve, ws))| {
                let bench = if *ve { Benchmark::VerilogEval } else { Benchmark::Rtllm };
                let rtl = format!("module m;{ws}{}{ws}endmodule", bodies[*b]);
                Task::new(format!("id{i:02}"), bench, "", rtl, "", None)
            })
            .collect();
        let distinct: std::collections::BTreeSet<usize> = picks.iter().map(|p| p.0).collect();
        let set = dedup_tasks(tasks.clone());
        prop_assert_eq!(set.tasks.len(), distinct.len());
        prop_assert_eq!(set.tasks.len() + set.alias_map.len(), tasks.len());
        for (dup, kept) in &set.alias_map {
            let d = tasks.iter().find(|t| &t.id == dup).unwrap();
            let k = set.get(kept).unwrap();
            prop_assert_eq!(d.canonical_hash(), k.canonical_hash());
            prop_assert!(k.benchmark.priority() <= d.benchmark.priority());
        }
        let again = dedup_tasks(tasks.into_iter().rev().collect());
        prop_assert_eq!(again.to_json(), set.to_json());
    }

    #[test]
    fn extraction_returns_first_verilog_fence(
        before in "[a-zA-Z ,.]{0,40}",
        body in prop::collection::vec("[a-z0-9;=() ]{0,30}", 1..6),
        other in prop::collection::vec("[a-z0-9;=() ]{0,30}", 1..4),
    ) {
        let text = format!(
            "{before}\n```python\n{}\n```\n```verilog\n{}\n```\n```verilog\n{}\n```\n",
            other.join("\n"),
            body.join("\n"),
            other.join("\n")
        );
        prop_assert_eq!(extract_first_fenced_block(&text), Some(body.join("\n")));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn edge_counts_add_across_disjoint_modules(
        a in prop::collection::vec((ident(), ident()), 1..6),
        b in prop::collection::vec((ident(), ident()), 1..6),
    ) {
        let module = |name: &str, assigns: &[(String, String)]| {
            let body: String = assigns.iter().map(|(l, r)| format!("  assign {l} = {r} + k;\n")).collect();
            format!("module {name};\n{body}endmodule\n")
        };
        let (ma, mb) = (module("left", &a), module("right", &b));
        let ea = build_dependency_graph(&ma).edge_count();
        let eb = build_dependency_graph(&mb).edge_count();
        prop_assert_eq!(build_dependency_graph(&format!("{ma}{mb}")).edge_count(), ea + eb);
    }

    #[test]
    fn pass_at_k_matches_enumeration(n in 1usize..=7, c_frac in 0.0..=1.0f64, k_frac in 0.0..=1.0f64) {
        let c = (c_frac * n as f64).round() as usize;
        let k = 1 + ((k_frac * (n - 1) as f64).round() as usize);
        let got: f64 = pass_at_k(n, c, k).unwrap();
        prop_assert!((got - pass_at_k_enumerated(n, c, k)).abs() < 1e-12);
        let closed = 1.0 - binom((n - c) as u64, k as u64) / binom(n as u64, k as u64);
        prop_assert!((got - closed).abs() < 1e-12);
    }

    #[test]
    fn pass_at_k_is_monotone(n in 1usize..40, c_frac in 0.0..=1.0f64) {
        let c = (c_frac * n as f64).round() as usize;
        let mut prev = 0.0;
        for k in 1..=n {
            let v: f64 = pass_at_k(n, c, k).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v + 1e-12 >= prev);
            prev = v;
        }
        if c < n {
            let more: f64 = pass_at_k(n, c + 1, 1).unwrap();
            prop_assert!(more >= pass_at_k::<f64>(n, c, 1).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn expected_never_exceeds_global(spec in outcomes_strategy()) {
        let (tasks, outcomes) = tasks_and_outcomes(&spec);
        let g = global_hqi(&tasks, &outcomes).unwrap();
        let e = expected_hqi(&tasks, &outcomes).unwrap();
        prop_assert!(e <= g + 1e-9);
        let m = cell_metrics(&tasks, &outcomes).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.coverage));
        prop_assert!(m.pass_at(1).unwrap() <= m.pass_at(5).unwrap() + 1e-12);
    }

    #[test]
    fn uniform_weight_scaling_is_invisible(spec in outcomes_strategy(), scale in 0.01..100.0f64) {
        let (tasks, outcomes) = tasks_and_outcomes(&spec);
        let scaled: Vec<Task> = tasks
            .iter()
            .cloned()
            .map(|mut t| {
                t.complexity_weight *= scale;
                t
            })
            .collect();
        let a = cell_metrics(&tasks, &outcomes).unwrap();
        let b = cell_metrics(&scaled, &outcomes).unwrap();
        prop_assert!((a.global_hqi - b.global_hqi).abs() < 1e-9);
        prop_assert!((a.expected_hqi - b.expected_hqi).abs() < 1e-9);
        prop_assert!((a.coverage - b.coverage).abs() < 1e-12);
        prop_assert_eq!(a.pass_at, b.pass_at);
    }

    #[test]
    fn pareto_matches_quadratic_oracle(
        pts in prop::collection::vec((0u8..20, 0u8..20), 0..200),
    ) {
        let points: Vec<ParetoPoint<f64, usize>> =
            pts.iter().enumerate().map(|(i, &(x, y))| ParetoPoint::new(x as f64 / 19.0, y as f64, i)).collect();
        let got: Vec<usize> = pareto_frontier(&points).into_iter().map(|p| p.label).collect();
        let want: Vec<usize> = points
            .iter()
            .filter(|p| !points.iter().any(|q| dominated((p.x, p.y), (q.x, q.y))))
            .map(|p| p.label)
            .collect();
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn spearman_is_symmetric_and_rank_based(
        pairs in prop::collection::vec((0u8..15, 0u8..15), 4..40),
    ) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let (Ok(ab), Ok(ba)) = (spearman_values(&a, &b), spearman_values(&b, &a)) else {
            // a constant side is undefined both ways
            prop_assert!(spearman_values(&a, &b).is_err() && spearman_values(&b, &a).is_err());
            return Ok(());
        };
        prop_assert!((ab.rho - ba.rho).abs() < 1e-12);
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab.rho) && (0.0..=1.0).contains(&ab.p));
        let warped: Vec<f64> = a.iter().map(|v| (v * 0.3).exp() + 7.0).collect();
        let w = spearman_values(&warped, &b).unwrap();
        prop_assert!((w.rho - ab.rho).abs() < 1e-12);
        let flipped: Vec<f64> = a.iter().map(|v| -v).collect();
        prop_assert!((spearman_values(&flipped, &b).unwrap().rho + ab.rho).abs() < 1e-12);
    }
}
