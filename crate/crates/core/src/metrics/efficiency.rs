// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::generation::GenerationRecord;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtftSummary<T> {
    pub mean: T,
    pub median: T,
    pub p95: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread<T> {
    pub mean: T,
    /// Population variance.
    pub variance: T,
    pub min: T,
    pub max: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Efficiency<T> {
    pub records: usize,
    pub tasks: usize,
    pub cost_per_task: T,
    /// Completion tokens per second of wall time.
    pub throughput: T,
    pub ttft: TtftSummary<T>,
    /// Completion-token counts.
    pub verbosity: Spread<T>,
}

/// Linear interpolation between order statistics at fraction `q` of a
/// sorted slice.
pub(crate) fn quantile_sorted<T: Scalar>(sorted: &[T], q: T) -> T {
    let last = sorted.len() - 1;
    let pos = q * T::from_count(last);
    let lo = pos.floor();
    let i = lo.to_usize().unwrap_or(0).min(last);
    let j = (i + 1).min(last);
    let frac = pos - lo;
    sorted[i] + (sorted[j] - sorted[i]) * frac
}

pub fn efficiency_metrics<T: Scalar>(records: &[GenerationRecord]) -> Result<Efficiency<T>, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = T::from_count(records.len());
    let tasks: BTreeSet<&str> = records.iter().map(|r| r.task_id.as_str()).collect();
    let total_cost: T = records.iter().fold(T::zero(), |a, r| a + T::lit(r.request_cost));
    let total_tokens: T = records.iter().fold(T::zero(), |a, r| a + T::lit(r.completion_tokens as f64));
    let total_wall: T = records.iter().fold(T::zero(), |a, r| a + T::lit(r.wall_time));

    let mut ttft: Vec<T> = records.iter().map(|r| T::lit(r.ttft)).collect();
    ttft.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let ttft_mean = ttft.iter().fold(T::zero(), |a, &b| a + b) / n;

    let tokens: Vec<T> = records.iter().map(|r| T::lit(r.completion_tokens as f64)).collect();
    let mean = total_tokens / n;
    let variance = tokens.iter().fold(T::zero(), |a, &t| a + (t - mean) * (t - mean)) / n;

    Ok(Efficiency {
        records: records.len(),
        tasks: tasks.len(),
        cost_per_task: total_cost / T::from_count(tasks.len()),
        throughput: if total_wall > T::zero() { total_tokens / total_wall } else { T::zero() },
        ttft: TtftSummary {
            mean: ttft_mean,
            median: quantile_sorted(&ttft, T::lit(0.5)),
            p95: quantile_sorted(&ttft, T::lit(0.95)),
        },
        verbosity: Spread {
            mean,
            variance,
            min: tokens.iter().copied().fold(T::infinity(), T::min),
            max: tokens.iter().copied().fold(T::neg_infinity(), T::max),
        },
    })
}
