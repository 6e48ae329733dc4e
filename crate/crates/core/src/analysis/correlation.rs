// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{AnalysisError, ConfigScore};
use crate::generation::DecodingConfig;
use crate::Scalar;

/// Rank correlation with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spearman<T> {
    pub rho: T,
    pub p: T,
    pub n: usize,
}

/// Pearson correlation; `None` when either side has zero variance or fewer
/// than two points.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Option<T> {
    let constant = |v: &[T]| v.iter().all(|x| *x == v[0]);
    if xs.len() != ys.len() || xs.len() < 2 || constant(xs) || constant(ys) {
        return None;
    }
    let n = T::from_count(xs.len());
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ys.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one()))
}

/// 1-based ranks, tied values sharing the mean of their positions.
fn average_ranks<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![T::zero(); values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = T::from_count(i + j + 2) / T::lit(2.0);
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided p-value of a rank correlation `rho` over `n` pairs, from
/// Student's t with `n − 2` degrees of freedom.
pub fn t_test_p(rho: f64, n: usize) -> f64 {
    assert!(n >= 3, "need at least 3 pairs");
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

/// Spearman's ρ of two paired samples.
pub fn spearman_values<T: Scalar>(a: &[T], b: &[T]) -> Result<Spearman<T>, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::Domain(format!("sample sizes differ ({} vs {})", a.len(), b.len())));
    }
    if a.len() < 3 {
        return Err(AnalysisError::Domain(format!("need at least 3 pairs, got {}", a.len())));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(AnalysisError::Domain("non-finite score".into()));
    }
    let mut rho = pearson(&average_ranks(a), &average_ranks(b))
        .ok_or_else(|| AnalysisError::Undefined("a ranking has zero variance".into()))?;
    // Rank correlations are rationals far coarser than this tolerance.
    if (T::one() - rho.abs()) < T::lit(1e-12) {
        rho = rho.signum();
    }
    let p = T::lit(t_test_p(rho.as_f64(), a.len()));
    Ok(Spearman { rho, p, n: a.len() })
}

/// Spearman's ρ between two score lists over the same configurations,
/// paired by configuration.
pub fn spearman<T: Scalar>(a: &[ConfigScore<T>], b: &[ConfigScore<T>]) -> Result<Spearman<T>, AnalysisError> {
    let by_config: HashMap<DecodingConfig, T> = b.iter().map(|s| (s.config, s.value)).collect();
    if by_config.len() != b.len() || a.len() != b.len() {
        return Err(AnalysisError::Domain("score lists cover different configuration sets".into()));
    }
    let mut xs = Vec::with_capacity(a.len());
    let mut ys = Vec::with_capacity(a.len());
    for s in a {
        let y = by_config
            .get(&s.config)
            .ok_or_else(|| AnalysisError::Domain(format!("configuration {} missing from the second list", s.config)))?;
        xs.push(s.value);
        ys.push(*y);
    }
    spearman_values(&xs, &ys)
}

/// One sweep cell: its configuration and named metric values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPoint<T> {
    pub config: DecodingConfig,
    pub metrics: BTreeMap<String, T>,
}

/// Pearson correlation between each decoding axis and each metric across
/// cells. Entries with a constant axis or metric are `None`.
pub fn correlation_matrix<T: Scalar>(cells: &[CellPoint<T>]) -> BTreeMap<String, BTreeMap<String, Option<T>>> {
    type Axis = (&'static str, fn(&DecodingConfig) -> f64);
    let axes: [Axis; 4] = [
        ("temperature", |c| c.temperature),
        ("top_p", |c| c.top_p),
        ("repetition_penalty", |c| c.repetition_penalty),
        ("presence_penalty", |c| c.presence_penalty),
    ];
    let metric_names: std::collections::BTreeSet<&String> = cells.iter().flat_map(|c| c.metrics.keys()).collect();
    let mut out = BTreeMap::new();
    for (axis, get) in axes {
        let mut row = BTreeMap::new();
        for m in &metric_names {
            let (xs, ys): (Vec<T>, Vec<T>) = cells
                .iter()
                .filter_map(|c| c.metrics.get(*m).map(|&v| (T::lit(get(&c.config)), v)))
                .unzip();
            row.insert((*m).clone(), pearson(&xs, &ys));
        }
        out.insert(axis.to_string(), row);
    }
    out
}
