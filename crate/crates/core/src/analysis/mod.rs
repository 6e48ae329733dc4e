// SPDX-License-Identifier: Apache-2.0

//! Comparative statistics over sweep cells.
//!
//! Pure functions, generic over the scalar type.

mod correlation;
mod distribution;
mod pareto;
mod ranking;

use thiserror::Error;

pub use correlation::{correlation_matrix, pearson, spearman, spearman_values, t_test_p, CellPoint, Spearman};
pub use distribution::{distribution_summary, DistributionSummary};
pub use pareto::{pareto_frontier, ParetoPoint};
pub use ranking::{default_position, gap, percentile, rank_configs, Bucket, ConfigScore, GapReport, RankedConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("correlation undefined: {0}")]
    Undefined(String),
}
