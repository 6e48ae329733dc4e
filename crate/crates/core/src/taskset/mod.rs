// SPDX-License-Identifier: Apache-2.0

//! Benchmark task suites: ingestion, RTL canonicalization, deduplication and
//! complexity weights.
//!
//! A manifest is a TOML file:
//!
//! ```toml
//! benchmark = "VerilogEval"          # default for every task below
//!
//! [[tasks]]
//! id = "adder_1bit"
//! prompt = "adder_1bit/prompt.txt"   # paths are relative to the manifest
//! golden = "adder_1bit/ref.v"
//! testbench = "adder_1bit/tb.v"
//! category = "Combinational Logic"   # optional, defaults to "uncategorized"
//! benchmark = "RTLLM"                # optional per-task override
//! ```

mod depgraph;
mod lexer;
mod normalize;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use depgraph::{build_dependency_graph, DependencyGraph};
pub use normalize::{canonical_hash, normalize_rtl};

pub const UNCATEGORIZED: &str = "uncategorized";

#[derive(Debug, Error)]
pub enum TasksetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("duplicate task id `{0}` in manifest")]
    DuplicateId(String),
    #[error("missing files: {}", .0.iter().map(|(id, p)| format!("{id}: {}", p.display())).collect::<Vec<_>>().join(", "))]
    MissingFiles(Vec<(String, PathBuf)>),
    #[error("task `{0}` has an empty golden design")]
    EmptyGolden(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Benchmark {
    VerilogEval,
    Rtllm,
    Other(String),
}

impl Benchmark {
    /// Dedup priority: lower wins.
    pub fn priority(&self) -> u8 {
        match self {
            Benchmark::VerilogEval => 0,
            Benchmark::Rtllm => 1,
            Benchmark::Other(_) => 2,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Benchmark::VerilogEval => "VerilogEval",
            Benchmark::Rtllm => "RTLLM",
            Benchmark::Other(s) => s,
        }
    }
}

impl From<String> for Benchmark {
    fn from(s: String) -> Self {
        match s.to_ascii_lowercase().as_str() {
            "verilogeval" => Benchmark::VerilogEval,
            "rtllm" => Benchmark::Rtllm,
            _ => Benchmark::Other(s),
        }
    }
}

impl From<&str> for Benchmark {
    fn from(s: &str) -> Self {
        Benchmark::from(s.to_string())
    }
}

impl From<Benchmark> for String {
    fn from(b: Benchmark) -> Self {
        b.name().to_string()
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub benchmark: Benchmark,
    pub prompt: String,
    pub golden_rtl: String,
    pub testbench: String,
    pub category: String,
    pub complexity_weight: f64,
}

impl Task {
    /// Builds a task and derives its complexity weight from the golden RTL.
    pub fn new(
        id: impl Into<String>,
        benchmark: Benchmark,
        prompt: impl Into<String>,
        golden_rtl: impl Into<String>,
        testbench: impl Into<String>,
        category: Option<String>,
    ) -> Self {
        let golden_rtl = golden_rtl.into();
        let (complexity_weight, _) = weight_of(&golden_rtl);
        Task {
            id: id.into(),
            benchmark,
            prompt: prompt.into(),
            golden_rtl,
            testbench: testbench.into(),
            category: category.unwrap_or_else(|| UNCATEGORIZED.to_string()),
            complexity_weight,
        }
    }

    pub fn canonical_hash(&self) -> String {
        canonical_hash(&self.golden_rtl)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskSet {
    pub tasks: Vec<Task>,
    /// Removed duplicate id -> retained id.
    pub alias_map: BTreeMap<String, String>,
    /// Parse-coverage warnings per task id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub warnings: BTreeMap<String, Vec<String>>,
}

impl TaskSet {
    pub fn get(&self, id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn benchmarks(&self) -> Vec<Benchmark> {
        let mut out: Vec<Benchmark> = Vec::new();
        for t in &self.tasks {
            if !out.contains(&t.benchmark) {
                out.push(t.benchmark.clone());
            }
        }
        out
    }

    pub fn tasks_of<'a>(&'a self, benchmark: &'a Benchmark) -> impl Iterator<Item = &'a Task> + 'a {
        self.tasks.iter().filter(move |t| &t.benchmark == benchmark)
    }

    pub fn load(path: &Path) -> Result<TaskSet, TasksetError> {
        let text = read(path)?;
        serde_json::from_str(&text)
            .map_err(|e| TasksetError::Manifest { path: path.to_path_buf(), message: e.to_string() })
    }

    /// Deterministic JSON encoding.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("task set serializes");
        s.push('\n');
        s
    }
}

/// Collapses tasks whose golden RTL is equal after [`normalize_rtl`].
///
/// The retained task of each group is the one with the highest benchmark
/// priority (VerilogEval, then RTLLM, then others), ties broken by the
/// lexicographically smallest id. Output tasks are ordered by benchmark and
/// id, so the result does not depend on input order.
pub fn dedup_tasks(tasks: Vec<Task>) -> TaskSet {
    let mut groups: HashMap<String, Vec<Task>> = HashMap::new();
    for t in tasks {
        groups.entry(t.canonical_hash()).or_default().push(t);
    }
    let mut set = TaskSet::default();
    for (_, mut members) in groups {
        members.sort_by(|a, b| {
            (a.benchmark.priority(), a.benchmark.name(), &a.id)
                .cmp(&(b.benchmark.priority(), b.benchmark.name(), &b.id))
        });
        let mut it = members.into_iter();
        let keep = it.next().expect("non-empty group");
        for dup in it {
            if dup.id != keep.id {
                set.alias_map.insert(dup.id, keep.id.clone());
            }
        }
        set.tasks.push(keep);
    }
    set.tasks.sort_by(|a, b| {
        (a.benchmark.priority(), a.benchmark.name(), &a.id)
            .cmp(&(b.benchmark.priority(), b.benchmark.name(), &b.id))
    });
    for t in &set.tasks {
        let (_, warnings) = weight_of(&t.golden_rtl);
        if !warnings.is_empty() {
            set.warnings.insert(t.id.clone(), warnings);
        }
    }
    set
}

/// `max(1, |edges|)` of the golden design's dependency graph.
pub fn complexity_weight(task: &Task) -> f64 {
    weight_of(&task.golden_rtl).0
}

fn weight_of(rtl: &str) -> (f64, Vec<String>) {
    let g = build_dependency_graph(rtl);
    let mut warnings = g.warnings.clone();
    if g.recognized == 0 {
        warnings.push("no constructs recognized; complexity weight falls back to 1".to_string());
        return (1.0, warnings);
    }
    (g.edge_count().max(1) as f64, warnings)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    #[serde(default)]
    benchmark: Option<String>,
    #[serde(default)]
    tasks: Vec<ManifestTask>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestTask {
    id: String,
    prompt: PathBuf,
    golden: PathBuf,
    testbench: PathBuf,
    #[serde(default)]
    category: Option<String>,
    #[serde(default)]
    benchmark: Option<String>,
}

fn read(path: &Path) -> Result<String, TasksetError> {
    std::fs::read_to_string(path)
        .map_err(|source| TasksetError::Io { path: path.to_path_buf(), source })
}

fn load_manifest_tasks(manifest_path: &Path) -> Result<Vec<Task>, TasksetError> {
    let text = read(manifest_path)?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| TasksetError::Manifest {
        path: manifest_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let mut seen = HashSet::new();
    for t in &manifest.tasks {
        if !seen.insert(t.id.as_str()) {
            return Err(TasksetError::DuplicateId(t.id.clone()));
        }
    }

    let mut missing = Vec::new();
    for t in &manifest.tasks {
        for p in [&t.prompt, &t.golden, &t.testbench] {
            let full = base.join(p);
            if !full.is_file() {
                missing.push((t.id.clone(), full));
            }
        }
    }
    if !missing.is_empty() {
        return Err(TasksetError::MissingFiles(missing));
    }

    let default_bench = manifest.benchmark.clone();
    manifest
        .tasks
        .into_iter()
        .map(|t| {
            let golden = read(&base.join(&t.golden))?;
            if golden.trim().is_empty() {
                return Err(TasksetError::EmptyGolden(t.id));
            }
            let bench = t
                .benchmark
                .or_else(|| default_bench.clone())
                .map(Benchmark::from)
                .unwrap_or_else(|| Benchmark::Other("unnamed".into()));
            Ok(Task::new(
                t.id,
                bench,
                read(&base.join(&t.prompt))?,
                golden,
                read(&base.join(&t.testbench))?,
                t.category,
            ))
        })
        .collect()
}

/// Loads one manifest, computes weights and removes duplicates.
pub fn ingest_benchmark(manifest_path: &Path) -> Result<TaskSet, TasksetError> {
    ingest_manifests(&[manifest_path])
}

/// Merges several manifests into one deduplicated task set. Task ids must be
/// unique across all manifests.
pub fn ingest_manifests<P: AsRef<Path>>(paths: &[P]) -> Result<TaskSet, TasksetError> {
    let mut all = Vec::new();
    let mut seen = HashSet::new();
    for p in paths {
        for t in load_manifest_tasks(p.as_ref())? {
            if !seen.insert(t.id.clone()) {
                return Err(TasksetError::DuplicateId(t.id));
            }
            all.push(t);
        }
    }
    Ok(dedup_tasks(all))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(id: &str, bench: Benchmark, rtl: &str) -> Task {
        Task::new(id, bench, "p", rtl, "tb", None)
    }

    #[test]
    fn priority_picks_verilogeval() {
        let set = dedup_tasks(vec![
            task("t2", Benchmark::Rtllm, "module m; // x\nendmodule"),
            task("t1", Benchmark::VerilogEval, "module m;\n  endmodule"),
        ]);
        assert_eq!(set.tasks.len(), 1);
        assert_eq!(set.tasks[0].id, "t1");
        assert_eq!(set.alias_map.get("t2").map(String::as_str), Some("t1"));
    }

    #[test]
    fn same_benchmark_tie_breaks_on_id() {
        let set = dedup_tasks(vec![
            task("b", Benchmark::Rtllm, "module m; endmodule"),
            task("a", Benchmark::Rtllm, "module m;  endmodule"),
        ]);
        assert_eq!(set.tasks[0].id, "a");
        assert_eq!(set.alias_map["b"], "a");
    }

    #[test]
    fn distinct_tasks_unchanged() {
        let set = dedup_tasks(vec![
            task("a", Benchmark::VerilogEval, "module a; endmodule"),
            task("b", Benchmark::VerilogEval, "module b; endmodule"),
        ]);
        assert_eq!(set.tasks.len(), 2);
        assert!(set.alias_map.is_empty());
    }

    #[test]
    fn weights() {
        let two = task("w", Benchmark::VerilogEval, "module w(input a, b, output y); assign y = a & b; endmodule");
        assert_eq!(complexity_weight(&two), 2.0);
        let empty = task("e", Benchmark::VerilogEval, "module e; endmodule");
        assert_eq!(complexity_weight(&empty), 1.0);
        let four = task(
            "f",
            Benchmark::VerilogEval,
            "module f(input a, b, c, d, output x, y);\n assign x = a | b;\n assign y = c ^ d;\nendmodule",
        );
        assert_eq!(complexity_weight(&four), 4.0);
    }

    #[test]
    fn unparseable_golden_falls_back_to_one_with_warning() {
        let set = dedup_tasks(vec![task("g", Benchmark::VerilogEval, "??? )))")]);
        assert_eq!(set.tasks[0].complexity_weight, 1.0);
        assert!(!set.warnings["g"].is_empty());
    }

    #[test]
    fn benchmark_names_round_trip() {
        for b in [Benchmark::VerilogEval, Benchmark::Rtllm, Benchmark::Other("Custom".into())] {
            assert_eq!(Benchmark::from(String::from(b.clone())), b);
        }
        assert_eq!(Benchmark::from("rtllm"), Benchmark::Rtllm);
    }
}
