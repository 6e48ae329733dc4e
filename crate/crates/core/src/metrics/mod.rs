// SPDX-License-Identifier: Apache-2.0

//! Quality and efficiency metrics.
//!
//! Everything here is a pure function over immutable inputs and is generic
//! over the floating-point type.

mod aggregate;
mod efficiency;
mod hqi;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aggregate::{
    category_hqi, cell_metrics, coverage, expected_hqi, global_hqi, pass_at_k, AttemptScore,
    CategoryMode, CellMetrics, TaskOutcomes,
};
pub use efficiency::{efficiency_metrics, Efficiency, Spread, TtftSummary};
pub(crate) use efficiency::quantile_sorted;
pub use hqi::{hqi_cost, hqi_score, HQI_MAX};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no outcomes for tasks: {}", .0.join(", "))]
    MissingOutcomes(Vec<String>),
    #[error("empty input")]
    Empty,
}

/// Post-synthesis area, delay and warning count of one design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthStats<T> {
    pub area: T,
    pub delay: T,
    pub warnings: u64,
}

/// Golden-reference area, delay and warning count for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenBaseline<T> {
    pub task_id: String,
    pub area_ref: T,
    pub delay_ref: T,
    pub warnings_ref: u64,
}

impl<T: Copy> GoldenBaseline<T> {
    pub fn from_stats(task_id: impl Into<String>, stats: &SynthStats<T>) -> Self {
        GoldenBaseline {
            task_id: task_id.into(),
            area_ref: stats.area,
            delay_ref: stats.delay,
            warnings_ref: stats.warnings,
        }
    }
}
