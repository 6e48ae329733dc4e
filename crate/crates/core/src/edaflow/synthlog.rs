// SPDX-License-Identifier: Apache-2.0

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::EdaError;
use crate::SynthStats;

/// Regexes that pull area, delay and warnings out of a synthesis log. The
/// first capture group of `area` and `delay` must be the number.
///
/// Defaults match Yosys 0.3x with an ABC liberty mapping run (`abc -D ...
/// -liberty`) followed by `stat -liberty`:
///
/// ```text
/// ABC: WireLoad = "none"  Gates = 2 (  0.0 %)   Cap =  1.9 ff (  0.0 %)   Area = 2.66 (100.0 %)   Delay = 48.32 ps  ( 50.0 %)
///    Chip area for module '\adder': 2.660000
/// Warning: Replacing memory \mem with list of registers.
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthLogPatterns {
    /// Last match wins (the top-level `stat` report comes last).
    pub area: String,
    /// Largest match wins (critical path over all mapped modules).
    pub delay: String,
    /// Lines matching this count as warnings.
    pub warning: String,
}

impl Default for SynthLogPatterns {
    fn default() -> Self {
        SynthLogPatterns {
            area: r"Chip area for (?:top )?module '[^']*':\s*([0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?)".into(),
            delay: r"Delay\s*=\s*([0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?)\s*ps".into(),
            warning: r"^Warning:".into(),
        }
    }
}

pub struct CompiledPatterns {
    area: Regex,
    delay: Regex,
    warning: Regex,
}

impl SynthLogPatterns {
    pub fn compile(&self) -> Result<CompiledPatterns, EdaError> {
        let re = |s: &str| Regex::new(s).map_err(|e| EdaError::Config(format!("bad pattern {s:?}: {e}")));
        Ok(CompiledPatterns { area: re(&self.area)?, delay: re(&self.delay)?, warning: re(&self.warning)? })
    }
}

pub fn parse_synthesis_log(log: &str) -> Result<SynthStats, EdaError> {
    parse_with(log, &SynthLogPatterns::default().compile()?)
}

pub fn parse_with(log: &str, p: &CompiledPatterns) -> Result<SynthStats, EdaError> {
    let number = |c: regex::Captures<'_>| c.get(1).and_then(|m| m.as_str().parse::<f64>().ok());
    let area = p.area.captures_iter(log).filter_map(number).last();
    let delay = p.delay.captures_iter(log).filter_map(number).fold(None, |acc: Option<f64>, d| {
        Some(acc.map_or(d, |a| a.max(d)))
    });
    let warnings = log.lines().filter(|l| p.warning.is_match(l)).count() as u64;
    match (area, delay) {
        (Some(area), Some(delay)) if area > 0.0 && delay > 0.0 => Ok(SynthStats { area, delay, warnings }),
        (Some(_), Some(_)) => Err(EdaError::SynthParse("non-positive area or delay".into())),
        (None, _) => Err(EdaError::SynthParse("no area report line".into())),
        (_, None) => Err(EdaError::SynthParse("no delay report line".into())),
    }
}
