// SPDX-License-Identifier: Apache-2.0

//! Report tables over a result store, rendered as aligned text, CSV or JSON.
//!
//! Output is a pure function of the store contents and the options: rows
//! follow model, benchmark and grid order, never thread or file order.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::analysis::{
    correlation_matrix, default_position, distribution_summary, pareto_frontier, spearman, AnalysisError, CellPoint,
    ConfigScore, ParetoPoint,
};
use crate::generation::{DecodingConfig, GenerationRecord};
use crate::metrics::{category_hqi, efficiency_metrics, AttemptScore, CategoryMode, MetricsError, TaskOutcomes};
use crate::sweep::{aggregate, build_grid, CellAggregate, JobKey, Store, SweepError, SweepGrid};
use crate::taskset::{Benchmark, TaskSet};
use crate::CellMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReportKind {
    Gaps,
    DefaultRank,
    Spearman,
    Pareto,
    Distribution,
    Correlation,
    Landscape,
    Categories,
    Efficiency,
}

impl ReportKind {
    pub const ALL: [ReportKind; 9] = [
        ReportKind::Gaps,
        ReportKind::DefaultRank,
        ReportKind::Spearman,
        ReportKind::Pareto,
        ReportKind::Distribution,
        ReportKind::Correlation,
        ReportKind::Landscape,
        ReportKind::Categories,
        ReportKind::Efficiency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Gaps => "gaps",
            ReportKind::DefaultRank => "default-rank",
            ReportKind::Spearman => "spearman",
            ReportKind::Pareto => "pareto",
            ReportKind::Distribution => "distribution",
            ReportKind::Correlation => "correlation",
            ReportKind::Landscape => "landscape",
            ReportKind::Categories => "categories",
            ReportKind::Efficiency => "efficiency",
        }
    }
}

impl FromStr for ReportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReportKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown report kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Num(f64),
    Missing,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Missing
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::from)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// A rendered report before formatting.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_text(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_text(&self) -> String {
        let text = |c: &Cell| match c {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format!("{v:.3}"),
            Cell::Missing => "-".into(),
        };
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(text).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|i| cells.iter().map(|r| r[i].chars().count()).chain([self.columns[i].len()]).max().unwrap_or(0))
            .collect();
        let line = |vals: Vec<&str>| {
            let mut s = vals
                .iter()
                .zip(&widths)
                .map(|(v, w)| format!("{v:<w$}"))
                .collect::<Vec<_>>()
                .join("  ");
            s.truncate(s.trim_end().len());
            s.push('\n');
            s
        };
        let mut out = line(self.columns.iter().map(String::as_str).collect());
        out.push_str(&line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
        for r in &cells {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
        }
        out
    }

    fn render_csv(&self) -> String {
        let esc = |s: &str| {
            if s.contains([',', '"', '\n', '\r']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        };
        let mut out = self.columns.iter().map(|c| esc(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for r in &self.rows {
            let line = r
                .iter()
                .map(|c| match c {
                    Cell::Text(s) => esc(s),
                    Cell::Int(i) => i.to_string(),
                    Cell::Num(v) => v.to_string(),
                    Cell::Missing => String::new(),
                })
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    let v = match v {
                        Cell::Text(s) => json!(s),
                        Cell::Int(i) => json!(i),
                        Cell::Num(x) => json!(x),
                        Cell::Missing => Value::Null,
                    };
                    m.insert(c.clone(), v);
                }
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{0}")]
    Unavailable(String),
}

/// What every report reads.
pub struct ReportInput<'a> {
    pub store: &'a Store,
    pub taskset: &'a TaskSet,
    pub models: Vec<String>,
    pub grid: SweepGrid,
    pub samples_per_task: u32,
    /// Aggregate incomplete cells instead of failing; affected rows are
    /// flagged.
    pub allow_partial: bool,
    /// Metrics for gaps, default-rank and distribution; pass@1 and pass@n
    /// when empty.
    pub metrics: Vec<String>,
}

/// Value of a named cell metric: `pass@k`, `global_hqi`, `expected_hqi` or
/// `coverage`.
pub fn metric_value(m: &CellMetrics, name: &str) -> Option<f64> {
    match name {
        "global_hqi" => Some(m.global_hqi),
        "expected_hqi" => Some(m.expected_hqi),
        "coverage" => Some(m.coverage),
        _ => name.strip_prefix("pass@").and_then(|k| k.parse().ok()).and_then(|k| m.pass_at(k)),
    }
}

type CellKey = (String, Benchmark);

struct Cells {
    /// Per (model, benchmark), cells in grid order.
    by_pair: BTreeMap<CellKey, Vec<(DecodingConfig, CellAggregate)>>,
    pairs: Vec<CellKey>,
}

impl<'a> ReportInput<'a> {
    fn benchmarks(&self) -> Vec<Benchmark> {
        self.taskset.benchmarks()
    }

    fn metrics(&self) -> Vec<String> {
        if self.metrics.is_empty() {
            let mut m = vec!["pass@1".to_string()];
            if self.samples_per_task > 1 {
                m.push(format!("pass@{}", self.samples_per_task));
            }
            m
        } else {
            self.metrics.clone()
        }
    }

    fn pairs(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for m in &self.models {
            for b in self.benchmarks() {
                out.push((m.clone(), b));
            }
        }
        out
    }

    /// Aggregates every cell, failing with all missing keys at once.
    fn cells(&self, configs: &[DecodingConfig]) -> Result<Cells, ReportError> {
        let mut by_pair = BTreeMap::new();
        let mut missing = Vec::new();
        let pairs = self.pairs();
        for (model, bench) in &pairs {
            let mut row = Vec::new();
            for c in configs {
                match aggregate(self.store, self.taskset, model, bench, c, self.samples_per_task, self.allow_partial) {
                    Ok(a) => row.push((*c, a)),
                    Err(SweepError::Incomplete(keys)) => missing.extend(keys),
                    Err(SweepError::Metrics(MetricsError::Empty)) if self.allow_partial => {}
                    Err(e) => return Err(e.into()),
                }
            }
            by_pair.insert((model.clone(), bench.clone()), row);
        }
        if !missing.is_empty() {
            return Err(SweepError::Incomplete(missing).into());
        }
        Ok(Cells { by_pair, pairs })
    }

    /// The grid without an appended default configuration.
    fn sweep_configs(&self) -> Vec<DecodingConfig> {
        match build_grid(&self.grid.axes, false) {
            Ok(g) => g.configs,
            Err(_) => self.grid.configs.iter().filter(|c| !c.is_default()).copied().collect(),
        }
    }

    fn value(&self, a: &CellAggregate, metric: &str) -> Result<f64, ReportError> {
        metric_value(&a.metrics, metric)
            .ok_or_else(|| ReportError::Unavailable(format!("metric `{metric}` is not available")))
    }

    /// Scores of one row. Under `allow_partial`, cells too small to define
    /// the metric are left out instead of failing.
    fn scores(&self, row: &[(DecodingConfig, CellAggregate)], metric: &str) -> Result<Vec<ConfigScore<f64>>, ReportError> {
        if self.allow_partial {
            return Ok(row.iter().filter_map(|(c, a)| metric_value(&a.metrics, metric).map(|v| ConfigScore::new(*c, v))).collect());
        }
        row.iter().map(|(c, a)| Ok(ConfigScore::new(*c, self.value(a, metric)?))).collect()
    }
}

fn partial(row: &[(DecodingConfig, CellAggregate)]) -> bool {
    row.iter().any(|(_, a)| a.partial)
}

pub fn build(kind: ReportKind, input: &ReportInput<'_>) -> Result<Table, ReportError> {
    match kind {
        ReportKind::Gaps => gaps(input),
        ReportKind::DefaultRank => default_rank(input),
        ReportKind::Spearman => spearman_report(input),
        ReportKind::Pareto => pareto(input),
        ReportKind::Distribution => distribution(input),
        ReportKind::Correlation => correlation(input),
        ReportKind::Landscape => landscape(input),
        ReportKind::Categories => categories(input),
        ReportKind::Efficiency => efficiency(input),
    }
}

fn gaps(input: &ReportInput<'_>) -> Result<Table, ReportError> {
    let cells = input.cells(&input.grid.configs)?;
    let mut t = Table::new(&["model", "benchmark", "metric", "best", "best_config", "worst", "worst_config", "gap", "partial"]);
    for pair in &cells.pairs {
        let row = &cells.by_pair[pair];
        if row.is_empty() {
            continue;
        }
        for metric in input.metrics() {
            let scores = input.scores(row, &metric)?;
            if scores.is_empty() {
                continue;
            }
            let ranked = crate::analysis::rank_configs(&scores)?;
            let (best, worst) = (ranked[0].score, ranked[ranked.len() - 1].score);
            t.push(vec![
                pair.0.as_str().into(),
                pair.1.name().into(),
                metric.into(),
                best.value.into(),
                best.config.to_string().into(),
                worst.value.into(),
                worst.config.to_string().into(),
                (best.value - worst.value).into(),
                partial(row).into(),
            ]);
        }
    }
    Ok(t)
}

fn default_rank(input: &ReportInput<'_>) -> Result<Table, ReportError> {
    let cells = input.cells(&input.grid.configs)?;
    let mut t = Table::new(&[
        "model", "benchmark", "metric", "default", "best", "worst", "gap_w", "gap_d", "rank", "n", "percentile", "bucket", "partial",
    ]);
    for pair in &cells.pairs {
        let row = &cells.by_pair[pair];
        if row.is_empty() {
            continue;
        }
        for metric in input.metrics() {
            let scores = input.scores(row, &metric)?;
            if input.allow_partial && !scores.iter().any(|s| s.config.is_default()) {
                continue;
            }
            let g = default_position(&metric, &scores)?;
            t.push(vec![
                pair.0.as_str().into(),
                pair.1.name().into(),
                metric.into(),
                g.default.value.into(),
                g.best.value.into(),
                g.worst.value.into(),
                g.gap_w.into(),
                g.gap_d.into(),
                g.default_rank.into(),
                g.n.into(),
                g.percentile.into(),
                g.bucket.name().into(),
                partial(row).into(),
            ]);
        }
    }
    Ok(t)
}

fn spearman_report(input: &ReportInput<'_>) -> Result<Table, ReportError> {
    let cells = input.cells(&input.sweep_configs())?;
    let benches = input.benchmarks();
    let mut t = Table::new(&["model", "metric", "benchmark_a", "benchmark_b", "rho", "p", "n"]);
    for model in &input.models {
        for (i, a) in benches.iter().enumerate() {
            for b in &benches[i + 1..] {
                let ra = &cells.by_pair[&(model.clone(), a.clone())];
                let rb = &cells.by_pair[&(model.clone(), b.clone())];
                for metric in input.metrics().iter().take(1) {
                    let (sa, sb) = common_configs(input.scores(ra, metric)?, input.scores(rb, metric)?);
                    let (rho, p, n) = match spearman(&sa, &sb) {
                        Ok(s) => (Cell::from(s.rho), Cell::from(s.p), Cell::from(s.n)),
                        Err(AnalysisError::Undefined(_)) => (Cell::Missing, Cell::Missing, Cell::from(sa.len())),
                        Err(AnalysisError::Domain(_)) if input.allow_partial => (Cell::Missing, Cell::Missing, Cell::from(sa.len())),
                        Err(e) => return Err(e.into()),
                    };
                    t.push(vec![model.as_str().into(), metric.as_str().into(), a.name().into(), b.name().into(), rho, p, n]);
                }
            }
        }
    }
    Ok(t)
}

/// Restricts both lists to the configurations they share.
fn common_configs(a: Vec<ConfigScore<f64>>, b: Vec<ConfigScore<f64>>) -> (Vec<ConfigScore<f64>>, Vec<ConfigScore<f64>>) {
    let in_b: std::collections::HashSet<DecodingConfig> = b.iter().map(|s| s.config).collect();
    let a: Vec<_> = a.into_iter().filter(|s| in_b.contains(&s.config)).collect();
    let in_a: std::collections::HashSet<DecodingConfig> = a.iter().map(|s| s.config).collect();
    (a, b.into_iter().filter(|s| in_a.contains(&s.config)).collect())
}

fn pareto(input: &ReportInput<'_>) -> Result<Table, ReportError> {
    let cells = input.cells(&input.grid.configs)?;
    let mut t = Table::new(&["model", "benchmark", "config", "pass_rate", "global_hqi", "frontier"]);
    for pair in &cells.pairs {
        let row = &cells.by_pair[pair];
        let points: Vec<ParetoPoint<f64, DecodingConfig>> = row
            .iter()
            .map(|(c, a)| Ok(ParetoPoint::new(input.value(a, "pass@1")?, a.metrics.global_hqi, *c)))
            .collect::<Result<_, ReportError>>()?;
        let front: Vec<DecodingConfig> = pareto_frontier(&points).into_iter().map(|p| p.label).collect();
        for p in &points {
            t.push(vec![
                pair.0.as_str().into(),
                pair.1.name().into(),
                p.label.to_string().into(),
                p.x.into(),
                p.y.into(),
                front.contains(&p.label).into(),
            ]);
        }
    }
    Ok(t)
}

fn distribution(input: &ReportInput<'_>) -> Result<Table, ReportError> {
    let cells = input.cells(&input.sweep_configs())?;
    let mut t = Table::new(&[
        "model", "benchmark", "metric", "n", "min", "q1", "median", "q3", "max", "whisker_low", "whisker_high", "outliers",
    ]);
    for pair in &cells.pairs {
        let row = &cells.by_pair[pair];
        if row.is_empty() {
            continue;
        }
        for metric in input.metrics() {
            let values: Vec<f64> = input.scores(row, &metric)?.into_iter().map(|s| s.value).collect();
            if values.is_empty() {
                continue;
            }
            let d = distribution_summary(&values)?;
            let outliers = d.outliers.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
            t.push(vec![
                pair.0.as_str().into(),
                pair.1.name().into(),
                metric.into(),
                d.n.into(),
                d.min.into(),
                d.q1.into(),
                d.median.into(),
                d.q3.into(),
                d.max.into(),
                d.whisker_low.into(),
                d.whisker_high.into(),
                outliers.into(),
            ]);
        }
    }
    Ok(t)
}

fn correlation(input: &ReportInput<'_>) -> Result<Table, ReportError> {
    let cells = input.cells(&input.sweep_configs())?;
    let mut metrics = input.metrics();
    metrics.push("global_hqi".into());
    let mut t = Table::new(&["model", "benchmark", "axis", "metric", "pearson"]);
    for pair in &cells.pairs {
        let points: Vec<CellPoint<f64>> = cells.by_pair[pair]
            .iter()
            .map(|(c, a)| {
                let values = metrics.iter().filter_map(|m| metric_value(&a.metrics, m).map(|v| (m.clone(), v))).collect();
                CellPoint { config: *c, metrics: values }
            })
            .collect();
        let matrix = correlation_matrix(&points);
        for (axis, _) in input.grid.axes.named() {
            for m in &metrics {
                let r = matrix.get(axis).and_then(|row| row.get(m)).copied().flatten();
                t.push(vec![pair.0.as_str().into(), pair.1.name().into(), axis.into(), m.as_str().into(), r.into()]);
            }
        }
    }
    Ok(t)
}

fn landscape(input: &ReportInput<'_>) -> Result<Table, ReportError> {
    let cells = input.cells(&[DecodingConfig::DEFAULT])?;
    let n = input.samples_per_task as usize;
    let mut columns: Vec<String> = ["model", "benchmark", "tasks"].map(String::from).to_vec();
    columns.extend((1..=n).map(|k| format!("pass@{k}")));
    columns.extend(["global_hqi", "expected_hqi", "coverage", "partial"].map(String::from));
    let mut t = Table::new(&columns);
    for pair in &cells.pairs {
        let Some((_, a)) = cells.by_pair[pair].first() else { continue };
        let mut row: Vec<Cell> = vec![pair.0.as_str().into(), pair.1.name().into(), a.metrics.tasks.into()];
        row.extend((1..=n).map(|k| Cell::from(a.metrics.pass_at(k))));
        row.extend([a.metrics.global_hqi.into(), a.metrics.expected_hqi.into(), a.metrics.coverage.into(), a.partial.into()]);
        t.push(row);
    }
    Ok(t)
}

fn categories(input: &ReportInput<'_>) -> Result<Table, ReportError> {
    let cells = input.cells(&[DecodingConfig::DEFAULT])?;
    let mut t = Table::new(&["model", "benchmark", "category", "tasks", "best_of_n", "per_attempt"]);
    for pair in &cells.pairs {
        // Only empty under `allow_partial`.
        let Some((config, _)) = cells.by_pair[pair].first().cloned() else { continue };
        let mut outcomes = BTreeMap::new();
        let mut tasks = Vec::new();
        for task in input.taskset.tasks_of(&pair.1) {
            let attempts: Vec<AttemptScore<f64>> = (0..input.samples_per_task)
                .filter_map(|s| {
                    let key = JobKey {
                        model: pair.0.clone(),
                        benchmark: pair.1.name().to_string(),
                        config,
                        task_id: task.id.clone(),
                        sample_index: s,
                    };
                    input.store.get(&key).map(|r| AttemptScore { passed: r.outcome.passed(), hqi: r.outcome.hqi })
                })
                .collect();
            if !attempts.is_empty() {
                tasks.push(task);
                outcomes.insert(task.id.clone(), TaskOutcomes { task_id: task.id.clone(), attempts });
            }
        }
        let best = category_hqi(&tasks, &outcomes, CategoryMode::BestOfN)?;
        let per = category_hqi(&tasks, &outcomes, CategoryMode::PerAttempt)?;
        for (cat, v) in &best {
            let count = tasks.iter().filter(|t| &t.category == cat).count();
            t.push(vec![
                pair.0.as_str().into(),
                pair.1.name().into(),
                cat.as_str().into(),
                count.into(),
                (*v).into(),
                per.get(cat).copied().into(),
            ]);
        }
    }
    Ok(t)
}

fn efficiency(input: &ReportInput<'_>) -> Result<Table, ReportError> {
    let mut t = Table::new(&[
        "model", "benchmark", "records", "tasks", "cost_per_task", "throughput", "ttft_mean", "ttft_median", "ttft_p95",
        "tokens_mean", "tokens_variance", "tokens_min", "tokens_max",
    ]);
    for (model, bench) in input.pairs() {
        let records: Vec<GenerationRecord> = input
            .store
            .records()
            .filter(|r| r.key.model == model && r.key.benchmark == bench.name())
            .map(|r| r.generation.clone())
            .collect();
        if records.is_empty() {
            continue;
        }
        let e = efficiency_metrics::<f64>(&records)?;
        t.push(vec![
            model.as_str().into(),
            bench.name().into(),
            e.records.into(),
            e.tasks.into(),
            e.cost_per_task.into(),
            e.throughput.into(),
            e.ttft.mean.into(),
            e.ttft.median.into(),
            e.ttft.p95.into(),
            e.verbosity.mean.into(),
            e.verbosity.variance.into(),
            e.verbosity.min.into(),
            e.verbosity.max.into(),
        ]);
    }
    Ok(t)
}

/// Builds and renders one report.
pub fn render(kind: ReportKind, format: Format, input: &ReportInput<'_>) -> Result<String, ReportError> {
    Ok(build(kind, input)?.render(format))
}
