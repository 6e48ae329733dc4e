// SPDX-License-Identifier: Apache-2.0

use super::{GoldenBaseline, MetricsError, SynthStats};
use crate::edaflow::GateVector;
use crate::Scalar;

pub const HQI_MAX: f64 = 100.0;

/// Normalized cost relative to the golden design:
/// `0.5·â/a* + 0.5·d̂/d* + 0.1·max(0, ŵ − w*)`.
pub fn hqi_cost<T: Scalar>(stats: &SynthStats<T>, baseline: &GoldenBaseline<T>) -> Result<T, MetricsError> {
    if !(baseline.area_ref > T::zero() && baseline.delay_ref > T::zero()) {
        return Err(MetricsError::Domain(format!(
            "baseline for {} must have positive area and delay (got {:?}, {:?})",
            baseline.task_id, baseline.area_ref, baseline.delay_ref
        )));
    }
    if !(stats.area > T::zero() && stats.delay > T::zero()) {
        return Err(MetricsError::Domain(format!(
            "synthesis stats must have positive area and delay (got {:?}, {:?})",
            stats.area, stats.delay
        )));
    }
    let half = T::lit(0.5);
    let extra_warnings = stats.warnings.saturating_sub(baseline.warnings_ref);
    Ok(half * (stats.area / baseline.area_ref)
        + half * (stats.delay / baseline.delay_ref)
        + T::lit(0.1) * T::from_u64(extra_warnings).expect("warning count is representable"))
}

/// `min(100/cost, 100)` for a design that passed every gate, 0 otherwise.
pub fn hqi_score<T: Scalar>(
    gates: &GateVector,
    stats: Option<&SynthStats<T>>,
    baseline: &GoldenBaseline<T>,
) -> T {
    if !gates.all_pass() {
        return T::zero();
    }
    let Some(stats) = stats else { return T::zero() };
    match hqi_cost(stats, baseline) {
        Ok(cost) => (T::lit(HQI_MAX) / cost).min(T::lit(HQI_MAX)),
        Err(e) => {
            log::error!("{e}; scoring attempt as 0");
            T::zero()
        }
    }
}
