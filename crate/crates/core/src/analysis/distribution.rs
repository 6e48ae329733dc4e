// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::metrics::quantile_sorted;
use crate::Scalar;

/// Box-plot statistics with Tukey fences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary<T> {
    pub n: usize,
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
    /// Smallest value inside the lower fence.
    pub whisker_low: T,
    /// Largest value inside the upper fence.
    pub whisker_high: T,
    /// Values beyond 1.5·IQR from the quartiles, ascending.
    pub outliers: Vec<T>,
}

pub fn distribution_summary<T: Scalar>(values: &[T]) -> Result<DistributionSummary<T>, AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::Domain("no values to summarize".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(AnalysisError::Domain(format!("non-finite value {v}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let q1 = quantile_sorted(&sorted, T::lit(0.25));
    let median = quantile_sorted(&sorted, T::lit(0.5));
    let q3 = quantile_sorted(&sorted, T::lit(0.75));
    let reach = T::lit(1.5) * (q3 - q1);
    let (lo, hi) = (q1 - reach, q3 + reach);
    let inside = |v: &T| *v >= lo && *v <= hi;
    Ok(DistributionSummary {
        n: sorted.len(),
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        whisker_low: sorted.iter().copied().find(inside).unwrap_or(q1),
        whisker_high: sorted.iter().rev().copied().find(inside).unwrap_or(q3),
        outliers: sorted.iter().copied().filter(|v| !inside(v)).collect(),
    })
}
