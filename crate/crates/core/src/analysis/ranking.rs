// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::generation::DecodingConfig;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore<T> {
    pub config: DecodingConfig,
    pub value: T,
}

impl<T> ConfigScore<T> {
    pub fn new(config: DecodingConfig, value: T) -> Self {
        ConfigScore { config, value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedConfig<T> {
    /// 1 is best.
    pub rank: usize,
    pub score: ConfigScore<T>,
}

/// Percentile band of the default configuration's rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    /// 90th percentile and above.
    Top,
    /// Above 60, below 90.
    Good,
    /// Above 25, up to 60.
    Mid,
    /// 25th percentile and below.
    Bottom,
}

impl Bucket {
    pub fn of<T: Scalar>(percentile: T) -> Bucket {
        let p = percentile.as_f64();
        if p >= 90.0 {
            Bucket::Top
        } else if p > 60.0 {
            Bucket::Good
        } else if p > 25.0 {
            Bucket::Mid
        } else {
            Bucket::Bottom
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Bucket::Top => "top",
            Bucket::Good => "good",
            Bucket::Mid => "mid",
            Bucket::Bottom => "bottom",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport<T> {
    pub metric: String,
    pub best: ConfigScore<T>,
    pub worst: ConfigScore<T>,
    pub default: ConfigScore<T>,
    /// best − worst.
    pub gap_w: T,
    /// best − default.
    pub gap_d: T,
    pub default_rank: usize,
    pub n: usize,
    pub percentile: T,
    pub bucket: Bucket,
}

fn check_finite<T: Scalar>(scores: &[ConfigScore<T>]) -> Result<(), AnalysisError> {
    if scores.is_empty() {
        return Err(AnalysisError::Domain("no scores to rank".into()));
    }
    match scores.iter().find(|s| !s.value.is_finite()) {
        Some(s) => Err(AnalysisError::Domain(format!("score of {} is {}", s.config, s.value))),
        None => Ok(()),
    }
}

/// Descending by value; equal values ordered by canonical configuration
/// text.
pub fn rank_configs<T: Scalar>(scores: &[ConfigScore<T>]) -> Result<Vec<RankedConfig<T>>, AnalysisError> {
    check_finite(scores)?;
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.config.canonical().cmp(&b.config.canonical()))
    });
    Ok(sorted.into_iter().enumerate().map(|(i, score)| RankedConfig { rank: i + 1, score }).collect())
}

/// `100·(N − rank)/(N − 1)`; a single configuration sits at 100.
pub fn percentile<T: Scalar>(rank: usize, n: usize) -> T {
    if n <= 1 {
        return T::lit(100.0);
    }
    T::lit(100.0) * T::from_count(n - rank) / T::from_count(n - 1)
}

fn find_default<T: Scalar>(scores: &[ConfigScore<T>]) -> Result<ConfigScore<T>, AnalysisError> {
    let mut defaults = scores.iter().filter(|s| s.config.is_default());
    match (defaults.next(), defaults.next()) {
        (Some(d), None) => Ok(*d),
        (None, _) => Err(AnalysisError::Domain("default configuration is missing".into())),
        (Some(_), Some(_)) => Err(AnalysisError::Domain("default configuration appears more than once".into())),
    }
}

/// Best, worst and default scores with the default's rank. The default loses
/// every tie: its rank is one plus the number of other configurations scoring
/// at least as well.
pub fn default_position<T: Scalar>(metric: &str, scores: &[ConfigScore<T>]) -> Result<GapReport<T>, AnalysisError> {
    let ranked = rank_configs(scores)?;
    let default = find_default(scores)?;
    let ahead = scores.iter().filter(|s| !s.config.is_default() && s.value >= default.value).count();
    let default_rank = ahead + 1;
    let n = scores.len();
    let best = ranked[0].score;
    let worst = ranked[n - 1].score;
    let pct = percentile::<T>(default_rank, n);
    Ok(GapReport {
        metric: metric.to_string(),
        best,
        worst,
        default,
        gap_w: best.value - worst.value,
        gap_d: best.value - default.value,
        default_rank,
        n,
        percentile: pct,
        bucket: Bucket::of(pct),
    })
}

/// `(best − worst, best − default)`.
pub fn gap<T: Scalar>(scores: &[ConfigScore<T>]) -> Result<(T, T), AnalysisError> {
    let r = default_position("", scores)?;
    Ok((r.gap_w, r.gap_d))
}
