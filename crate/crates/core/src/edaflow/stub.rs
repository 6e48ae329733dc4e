// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EdaBackend, EdaError, GateRun, SynthRun};
use crate::taskset::canonical_hash;
use crate::SynthStats;

/// Declared outcome of one design under the stub backend.
///
/// Stored as `<dir>/<canonical_hash(rtl)>.json`; designs without a sidecar
/// fall back to `<dir>/default.json`, and fail syntax when that is absent
/// too.
///
/// ```json
/// {"syntax_ok": true, "sim_pass": true, "synthesizable": true,
///  "area": 12.5, "delay": 300.0, "warnings": 1}
/// ```
///
/// `timeout` names a gate (`"syntax"`, `"simulation"`, `"synthesis"`) that
/// reports a timeout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubSidecar {
    pub syntax_ok: bool,
    pub sim_pass: bool,
    pub synthesizable: bool,
    #[serde(default)]
    pub area: f64,
    #[serde(default)]
    pub delay: f64,
    #[serde(default)]
    pub warnings: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout: Option<String>,
}

impl StubSidecar {
    /// Passes every gate with the given statistics.
    pub fn pass(area: f64, delay: f64, warnings: u64) -> Self {
        StubSidecar { syntax_ok: true, sim_pass: true, synthesizable: true, area, delay, warnings, timeout: None }
    }

    pub fn fail_syntax() -> Self {
        StubSidecar { syntax_ok: false, sim_pass: false, synthesizable: false, area: 0.0, delay: 0.0, warnings: 0, timeout: None }
    }

    pub fn path_for(dir: &Path, rtl: &str) -> PathBuf {
        dir.join(format!("{}.json", canonical_hash(rtl)))
    }

    /// Writes this sidecar for `rtl` into `dir` and returns its path.
    pub fn write_for(&self, dir: &Path, rtl: &str) -> std::io::Result<PathBuf> {
        let path = Self::path_for(dir, rtl);
        std::fs::write(&path, serde_json::to_string_pretty(self).expect("sidecar serializes"))?;
        Ok(path)
    }
}

/// Offline evaluation backend driven by sidecar files.
pub struct StubBackend {
    dir: PathBuf,
    liberty: Option<PathBuf>,
}

impl StubBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        StubBackend { dir: dir.into(), liberty: None }
    }

    /// Only contributes to the fingerprint.
    pub fn with_liberty(mut self, liberty: impl Into<PathBuf>) -> Self {
        self.liberty = Some(liberty.into());
        self
    }

    /// Stages the design in `work` and reads it back, as a tool would.
    fn lookup(&self, rtl: &str, work: &Path) -> Result<(StubSidecar, String), EdaError> {
        let design = work.join("design.v");
        std::fs::write(&design, rtl).map_err(|e| EdaError::Io(format!("{}: {e}", design.display())))?;
        let staged = std::fs::read_to_string(&design).map_err(|e| EdaError::Io(format!("{}: {e}", design.display())))?;
        let key = canonical_hash(&staged);
        for path in [self.dir.join(format!("{key}.json")), self.dir.join("default.json")] {
            match std::fs::read_to_string(&path) {
                Ok(text) => {
                    let sidecar = serde_json::from_str(&text)
                        .map_err(|e| EdaError::Config(format!("bad stub sidecar {}: {e}", path.display())))?;
                    return Ok((sidecar, format!("stub: {} ({key})\n", path.display())));
                }
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(e) => return Err(EdaError::Io(format!("{}: {e}", path.display()))),
            }
        }
        Ok((StubSidecar::fail_syntax(), format!("stub: no sidecar for {key}\n")))
    }
}

fn gate(ok: bool, timed_out: bool, log: String) -> GateRun {
    GateRun { ok: ok && !timed_out, timed_out, log }
}

impl EdaBackend for StubBackend {
    fn check_syntax(&self, rtl: &str, work: &Path) -> Result<GateRun, EdaError> {
        let (s, log) = self.lookup(rtl, work)?;
        let t = s.timeout.as_deref() == Some("syntax");
        Ok(gate(s.syntax_ok, t, log + &format!("syntax_ok={}\n", s.syntax_ok)))
    }

    fn simulate(&self, rtl: &str, testbench: &str, work: &Path) -> Result<GateRun, EdaError> {
        let tb = work.join("tb.v");
        std::fs::write(&tb, testbench).map_err(|e| EdaError::Io(format!("{}: {e}", tb.display())))?;
        let (s, log) = self.lookup(rtl, work)?;
        let t = s.timeout.as_deref() == Some("simulation");
        Ok(gate(s.syntax_ok && s.sim_pass, t, log + &format!("sim_pass={}\n", s.sim_pass)))
    }

    fn synthesize(&self, rtl: &str, work: &Path) -> Result<SynthRun, EdaError> {
        let (s, log) = self.lookup(rtl, work)?;
        let timed_out = s.timeout.as_deref() == Some("synthesis");
        let ok = s.syntax_ok && s.synthesizable && !timed_out;
        let stats = if ok {
            if !(s.area > 0.0 && s.delay > 0.0) {
                return Err(EdaError::Config(format!(
                    "stub sidecar declares a synthesizable design with area {} and delay {}",
                    s.area, s.delay
                )));
            }
            Some(SynthStats { area: s.area, delay: s.delay, warnings: s.warnings })
        } else {
            None
        };
        Ok(SynthRun { ok, timed_out, stats, log: log + &format!("synthesizable={}\n", s.synthesizable) })
    }

    /// Hash over every sidecar's name and content, plus the liberty file.
    fn fingerprint(&self) -> Result<String, EdaError> {
        let mut h = Sha256::new();
        h.update(b"stub-v1\n");
        let mut entries: Vec<PathBuf> = match std::fs::read_dir(&self.dir) {
            Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(EdaError::Io(format!("{}: {e}", self.dir.display()))),
        };
        entries.sort();
        for p in entries {
            let bytes = std::fs::read(&p).map_err(|e| EdaError::Io(format!("{}: {e}", p.display())))?;
            h.update(p.file_name().unwrap_or_default().to_string_lossy().as_bytes());
            h.update(b"\0");
            h.update(&bytes);
        }
        if let Some(lib) = &self.liberty {
            let bytes = std::fs::read(lib).map_err(|e| EdaError::Config(format!("liberty file {}: {e}", lib.display())))?;
            h.update(b"liberty\0");
            h.update(&bytes);
        }
        Ok(format!("stub-v1:{}", hex::encode(h.finalize())))
    }
}
