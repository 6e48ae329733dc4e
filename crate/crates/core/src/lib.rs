// SPDX-License-Identifier: Apache-2.0

//! Synthesis-in-the-loop evaluation harness for RTL code generation.
//!
//! The pipeline ingests benchmark task suites ([`taskset`]), queries a
//! chat-completions endpoint under a decoding configuration ([`generation`]),
//! gates every candidate through syntax, simulation and synthesis
//! ([`edaflow`]), scores it with the hardware quality index ([`metrics`]),
//! runs the full decoding-hyperparameter grid with resumable persistence
//! ([`sweep`]) and computes the comparative statistics over sweep cells
//! ([`analysis`], [`report`]).
//!
//! The numeric core (`metrics`, `analysis`) is generic over the scalar type
//! through [`Scalar`]; the aliases below pin the common instantiations.

pub mod analysis;
pub mod config;
pub mod edaflow;
pub mod generation;
pub mod metrics;
pub mod report;
pub mod scalar;
pub mod sweep;
pub mod taskset;

pub use scalar::Scalar;

pub use edaflow::{EvalOutcome, GateVector};
pub use generation::{DecodingConfig, GenerationRecord};
pub use sweep::{JobKey, ResultRecord};
pub use taskset::{Benchmark, Task, TaskSet};

/// Post-synthesis statistics in double precision, as persisted in the store.
pub type SynthStats = metrics::SynthStats<f64>;
/// Golden reference values in double precision.
pub type GoldenBaseline = metrics::GoldenBaseline<f64>;
pub type CellMetrics = metrics::CellMetrics<f64>;
pub type CellMetricsF32 = metrics::CellMetrics<f32>;
pub type TaskOutcomes = metrics::TaskOutcomes<f64>;
pub type ConfigScore = analysis::ConfigScore<f64>;
pub type GapReport = analysis::GapReport<f64>;
pub type Spearman = analysis::Spearman<f64>;
pub type SpearmanF32 = analysis::Spearman<f32>;
pub type DistributionSummary = analysis::DistributionSummary<f64>;
pub type ParetoPoint<L> = analysis::ParetoPoint<f64, L>;
