// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::process::{expand, run};
use super::synthlog::{parse_with, CompiledPatterns, SynthLogPatterns};
use super::{EdaBackend, EdaError, GateRun, SynthRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateTimeouts {
    pub syntax_secs: u64,
    pub simulation_secs: u64,
    pub synthesis_secs: u64,
}

impl Default for GateTimeouts {
    fn default() -> Self {
        GateTimeouts { syntax_secs: 60, simulation_secs: 120, synthesis_secs: 300 }
    }
}

/// Command templates for the real toolchain.
///
/// Arguments may contain `{design}`, `{testbench}`, `{workdir}`, `{script}`,
/// `{netlist}` and `{liberty}`; the synthesis script may use `{design}`,
/// `{netlist}` and `{liberty}`. Defaults target Icarus Verilog and Yosys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolchainConfig {
    pub syntax: Vec<String>,
    pub sim_compile: Vec<String>,
    pub sim_run: Vec<String>,
    pub synth: Vec<String>,
    pub synth_script: String,
    pub liberty: Option<PathBuf>,
    /// A simulation log line matching this marks a failure.
    pub failure_pattern: String,
    /// Lines matching this are never failures (e.g. `Mismatches: 0`).
    pub pass_exempt_pattern: Option<String>,
    pub timeouts: GateTimeouts,
    pub patterns: SynthLogPatterns,
    /// Commands whose output identifies the tool versions.
    pub version_commands: Vec<Vec<String>>,
}

fn argv(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

pub const DEFAULT_SYNTH_SCRIPT: &str = "read_verilog -sv {design}
synth -flatten -auto-top
dfflibmap -liberty {liberty}
abc -D 10000 -liberty {liberty}
opt_clean
stat -liberty {liberty}
write_verilog -noattr {netlist}
";

impl Default for ToolchainConfig {
    fn default() -> Self {
        ToolchainConfig {
            syntax: argv(&["iverilog", "-g2012", "-t", "null", "{design}"]),
            sim_compile: argv(&["iverilog", "-g2012", "-o", "{workdir}/sim.out", "{design}", "{testbench}"]),
            sim_run: argv(&["vvp", "-n", "{workdir}/sim.out"]),
            synth: argv(&["yosys", "-s", "{script}"]),
            synth_script: DEFAULT_SYNTH_SCRIPT.to_string(),
            liberty: None,
            failure_pattern: r"(?i)(error|mismatch|failed)".to_string(),
            pass_exempt_pattern: Some(r"(?i)(mismatches:\s*0\b|no mismatches)".to_string()),
            timeouts: GateTimeouts::default(),
            patterns: SynthLogPatterns::default(),
            version_commands: vec![argv(&["iverilog", "-V"]), argv(&["yosys", "-V"])],
        }
    }
}

/// Runs the configured external tools.
pub struct ToolchainBackend {
    config: ToolchainConfig,
    liberty: PathBuf,
    failure: Regex,
    exempt: Option<Regex>,
    patterns: CompiledPatterns,
}

impl ToolchainBackend {
    /// Validates patterns and the liberty path up front.
    pub fn new(config: ToolchainConfig) -> Result<Self, EdaError> {
        let liberty = config
            .liberty
            .clone()
            .ok_or_else(|| EdaError::Config("the real toolchain needs a liberty file".into()))?;
        if !liberty.is_file() {
            return Err(EdaError::Config(format!("liberty file {} not found", liberty.display())));
        }
        let re = |s: &str| Regex::new(s).map_err(|e| EdaError::Config(format!("bad pattern {s:?}: {e}")));
        Ok(ToolchainBackend {
            failure: re(&config.failure_pattern)?,
            exempt: config.pass_exempt_pattern.as_deref().map(re).transpose()?,
            patterns: config.patterns.compile()?,
            liberty,
            config,
        })
    }

    pub fn config(&self) -> &ToolchainConfig {
        &self.config
    }

    fn vars(&self, work: &Path) -> BTreeMap<&'static str, String> {
        let p = |name: &str| work.join(name).to_string_lossy().into_owned();
        BTreeMap::from([
            ("design", p("design.v")),
            ("testbench", p("tb.v")),
            ("workdir", work.to_string_lossy().into_owned()),
            ("script", p("synth.ys")),
            ("netlist", p("netlist.v")),
            ("liberty", self.liberty.to_string_lossy().into_owned()),
        ])
    }

    fn stage(path: &Path, text: &str) -> Result<(), EdaError> {
        std::fs::write(path, text).map_err(|e| EdaError::Io(format!("{}: {e}", path.display())))
    }

    fn log_fails(&self, log: &str) -> bool {
        log.lines().any(|l| self.failure.is_match(l) && !self.exempt.as_ref().is_some_and(|x| x.is_match(l)))
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

impl EdaBackend for ToolchainBackend {
    fn check_syntax(&self, rtl: &str, work: &Path) -> Result<GateRun, EdaError> {
        let vars = self.vars(work);
        Self::stage(Path::new(&vars["design"]), rtl)?;
        let r = run(&expand(&self.config.syntax, &vars), work, secs(self.config.timeouts.syntax_secs))?;
        Ok(GateRun { ok: r.success, timed_out: r.timed_out, log: r.output })
    }

    fn simulate(&self, rtl: &str, testbench: &str, work: &Path) -> Result<GateRun, EdaError> {
        let vars = self.vars(work);
        Self::stage(Path::new(&vars["design"]), rtl)?;
        Self::stage(Path::new(&vars["testbench"]), testbench)?;
        let budget = secs(self.config.timeouts.simulation_secs);
        let compile = run(&expand(&self.config.sim_compile, &vars), work, budget)?;
        if !compile.success {
            return Ok(GateRun { ok: false, timed_out: compile.timed_out, log: compile.output });
        }
        let r = run(&expand(&self.config.sim_run, &vars), work, budget)?;
        let ok = r.success && !self.log_fails(&r.output);
        Ok(GateRun { ok, timed_out: r.timed_out, log: compile.output + &r.output })
    }

    fn synthesize(&self, rtl: &str, work: &Path) -> Result<SynthRun, EdaError> {
        let vars = self.vars(work);
        Self::stage(Path::new(&vars["design"]), rtl)?;
        let mut script = self.config.synth_script.clone();
        for k in ["design", "netlist", "liberty"] {
            script = script.replace(&format!("{{{k}}}"), &vars[k]);
        }
        Self::stage(Path::new(&vars["script"]), &script)?;
        let r = run(&expand(&self.config.synth, &vars), work, secs(self.config.timeouts.synthesis_secs))?;
        let netlist_ok = std::fs::metadata(&vars["netlist"]).is_ok_and(|m| m.len() > 0);
        if !(r.success && netlist_ok) {
            return Ok(SynthRun { ok: false, timed_out: r.timed_out, stats: None, log: r.output });
        }
        match parse_with(&r.output, &self.patterns) {
            Ok(stats) => Ok(SynthRun { ok: true, timed_out: false, stats: Some(stats), log: r.output }),
            Err(e) => {
                log::error!("synthesis succeeded but its report is unreadable: {e}");
                Ok(SynthRun { ok: false, timed_out: false, stats: None, log: r.output })
            }
        }
    }

    /// First output line of every version command plus the liberty file
    /// hash.
    fn fingerprint(&self) -> Result<String, EdaError> {
        let mut h = Sha256::new();
        let cwd = std::env::temp_dir();
        for cmd in &self.config.version_commands {
            let r = run(cmd, &cwd, Duration::from_secs(30))?;
            h.update(cmd.join(" ").as_bytes());
            h.update(b"\0");
            h.update(r.output.lines().next().unwrap_or("").trim().as_bytes());
            h.update(b"\n");
        }
        let lib = std::fs::read(&self.liberty)
            .map_err(|e| EdaError::Config(format!("liberty file {}: {e}", self.liberty.display())))?;
        h.update(Sha256::digest(&lib));
        h.update(self.config.synth_script.as_bytes());
        Ok(format!("tools:{}", hex::encode(h.finalize())))
    }
}
