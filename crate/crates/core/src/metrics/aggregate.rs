// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::taskset::Task;
use crate::Scalar;

/// The two facts about one attempt that aggregation needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttemptScore<T> {
    /// All three gates passed.
    pub passed: bool,
    pub hqi: T,
}

/// Attempts for one task, ordered by sample index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcomes<T> {
    pub task_id: String,
    pub attempts: Vec<AttemptScore<T>>,
}

impl<T: Scalar> TaskOutcomes<T> {
    pub fn n(&self) -> usize {
        self.attempts.len()
    }

    pub fn passes(&self) -> usize {
        self.attempts.iter().filter(|a| a.passed).count()
    }

    pub fn best_hqi(&self) -> T {
        self.attempts.iter().map(|a| a.hqi).fold(T::zero(), T::max)
    }

    pub fn mean_hqi(&self) -> T {
        if self.attempts.is_empty() {
            return T::zero();
        }
        self.attempts.iter().map(|a| a.hqi).fold(T::zero(), |a, b| a + b) / T::from_count(self.n())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics<T> {
    /// pass@k for k = 1..=n.
    pub pass_at: BTreeMap<usize, T>,
    pub global_hqi: T,
    pub expected_hqi: T,
    pub coverage: T,
    pub tasks: usize,
    /// Attempts per task.
    pub samples: usize,
}

impl<T: Scalar> CellMetrics<T> {
    pub fn pass_at(&self, k: usize) -> Option<T> {
        self.pass_at.get(&k).copied()
    }
}

/// Unbiased pass@k estimator `1 − C(n−c, k)/C(n, k)`.
pub fn pass_at_k<T: Scalar>(n: usize, c: usize, k: usize) -> Result<T, MetricsError> {
    if k == 0 || k > n {
        return Err(MetricsError::Domain(format!("pass@k needs 1 <= k <= n (k={k}, n={n})")));
    }
    if c > n {
        return Err(MetricsError::Domain(format!("passing count {c} exceeds sample count {n}")));
    }
    if n - c < k {
        return Ok(T::one());
    }
    // C(n−c, k)/C(n, k) = Π_{i<k} (n−c−i)/(n−i)
    let miss = (0..k).fold(T::one(), |acc, i| {
        acc * T::from_count(n - c - i) / T::from_count(n - i)
    });
    Ok(T::one() - miss)
}

fn weighted<'a, T: Scalar, R: AsRef<Task>>(
    tasks: &'a [R],
    outcomes: &'a BTreeMap<String, TaskOutcomes<T>>,
) -> Result<Vec<(T, &'a TaskOutcomes<T>)>, MetricsError> {
    if tasks.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(tasks.len());
    for t in tasks {
        let t = t.as_ref();
        match outcomes.get(&t.id) {
            Some(o) if !o.attempts.is_empty() => out.push((T::lit(t.complexity_weight), o)),
            _ => missing.push(t.id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(MetricsError::MissingOutcomes(missing));
    }
    Ok(out)
}

fn weighted_mean<T: Scalar>(pairs: &[(T, &TaskOutcomes<T>)], f: impl Fn(&TaskOutcomes<T>) -> T) -> T {
    let (num, den) = pairs
        .iter()
        .fold((T::zero(), T::zero()), |(n, d), (w, o)| (n + *w * f(o), d + *w));
    num / den
}

/// Complexity-weighted mean of each task's best attempt.
pub fn global_hqi<T: Scalar, R: AsRef<Task>>(
    tasks: &[R],
    outcomes: &BTreeMap<String, TaskOutcomes<T>>,
) -> Result<T, MetricsError> {
    Ok(weighted_mean(&weighted(tasks, outcomes)?, TaskOutcomes::best_hqi))
}

/// Complexity-weighted mean of each task's mean attempt.
pub fn expected_hqi<T: Scalar, R: AsRef<Task>>(
    tasks: &[R],
    outcomes: &BTreeMap<String, TaskOutcomes<T>>,
) -> Result<T, MetricsError> {
    Ok(weighted_mean(&weighted(tasks, outcomes)?, TaskOutcomes::mean_hqi))
}

/// Share of total complexity weight on tasks solved at least once.
pub fn coverage<T: Scalar, R: AsRef<Task>>(
    tasks: &[R],
    outcomes: &BTreeMap<String, TaskOutcomes<T>>,
) -> Result<T, MetricsError> {
    Ok(weighted_mean(&weighted(tasks, outcomes)?, |o| {
        if o.passes() > 0 {
            T::one()
        } else {
            T::zero()
        }
    }))
}

/// All metrics of one sweep cell. pass@k is an unweighted task mean and is
/// reported for k up to the smallest per-task attempt count.
pub fn cell_metrics<T: Scalar, R: AsRef<Task>>(
    tasks: &[R],
    outcomes: &BTreeMap<String, TaskOutcomes<T>>,
) -> Result<CellMetrics<T>, MetricsError> {
    let pairs = weighted(tasks, outcomes)?;
    let n = pairs.iter().map(|(_, o)| o.n()).min().expect("non-empty");
    let mut pass_at = BTreeMap::new();
    for k in 1..=n {
        let mut sum = T::zero();
        for (_, o) in &pairs {
            sum = sum + pass_at_k::<T>(o.n(), o.passes(), k)?;
        }
        pass_at.insert(k, sum / T::from_count(pairs.len()));
    }
    Ok(CellMetrics {
        pass_at,
        global_hqi: weighted_mean(&pairs, TaskOutcomes::best_hqi),
        expected_hqi: weighted_mean(&pairs, TaskOutcomes::mean_hqi),
        coverage: weighted_mean(&pairs, |o| if o.passes() > 0 { T::one() } else { T::zero() }),
        tasks: pairs.len(),
        samples: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryMode {
    /// Best attempt per task.
    BestOfN,
    /// Mean over attempts per task.
    PerAttempt,
}

/// Complexity-weighted HQI per task category. Categories without tasks do
/// not appear.
pub fn category_hqi<T: Scalar, R: AsRef<Task>>(
    tasks: &[R],
    outcomes: &BTreeMap<String, TaskOutcomes<T>>,
    mode: CategoryMode,
) -> Result<BTreeMap<String, T>, MetricsError> {
    let pairs = weighted(tasks, outcomes)?;
    let mut by_cat: BTreeMap<String, Vec<(T, &TaskOutcomes<T>)>> = BTreeMap::new();
    for (t, p) in tasks.iter().zip(pairs) {
        by_cat.entry(t.as_ref().category.clone()).or_default().push(p);
    }
    Ok(by_cat
        .into_iter()
        .map(|(cat, ps)| {
            let v = match mode {
                CategoryMode::BestOfN => weighted_mean(&ps, TaskOutcomes::best_hqi),
                CategoryMode::PerAttempt => weighted_mean(&ps, TaskOutcomes::mean_hqi),
            };
            (cat, v)
        })
        .collect())
}

impl AsRef<Task> for Task {
    fn as_ref(&self) -> &Task {
        self
    }
}
