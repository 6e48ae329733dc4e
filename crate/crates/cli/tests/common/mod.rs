// SPDX-License-Identifier: Apache-2.0

//! Self-contained workspace for driving the binary offline: replay
//! generation plus stub evaluation.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hqisweep::edaflow::StubSidecar;
use hqisweep::generation::replay_key;
use hqisweep::sweep::{build_grid, SweepAxes};
use hqisweep::DecodingConfig;

pub const MODEL: &str = "replay-model";
pub const SAMPLES: u32 = 5;

pub struct Tasks {
    pub id: &'static str,
    pub bench: &'static str,
    pub category: &'static str,
}

pub const TASKS: [Tasks; 3] = [
    Tasks { id: "ve_add", bench: "VerilogEval", category: "arith" },
    Tasks { id: "ve_mux", bench: "VerilogEval", category: "control" },
    Tasks { id: "rt_cnt", bench: "RTLLM", category: "arith" },
];

pub fn golden(id: &str) -> String {
    match id {
        "ve_add" => "module ve_add(input [3:0] a, input [3:0] b, output [4:0] y);\n  assign y = a + b;\nendmodule\n".into(),
        "ve_mux" => "module ve_mux(input s, input [7:0] a, input [7:0] b, output [7:0] y);\n  assign y = s ? a : b;\nendmodule\n".into(),
        _ => "module rt_cnt(input clk, input rst, output reg [3:0] q);\n  always @(posedge clk) begin\n    if (rst) q <= 4'd0;\n    else q <= q + 4'd1;\n  end\nendmodule\n".into(),
    }
}

/// Candidate text for one sample; `variant` 0 is the golden design itself.
fn candidate(id: &str, variant: usize) -> String {
    if variant == 0 {
        return golden(id);
    }
    golden(id).replace("endmodule", &format!("  wire spare_{variant};\nendmodule"))
}

pub fn axes() -> SweepAxes {
    SweepAxes {
        temperature: vec![0.0, 0.4, 0.8],
        top_p: vec![1.0],
        repetition_penalty: vec![1.0],
        presence_penalty: vec![0.0],
    }
}

pub fn configs() -> Vec<DecodingConfig> {
    build_grid(&axes(), true).expect("valid axes").configs
}

/// Deterministic outcome of sample `s` under config index `c` for task `t`:
/// 0 = golden, 1..=3 = worse but passing, 4 = syntax failure. Config `c`
/// fails `c` of every five samples.
fn variant(t: usize, c: usize, s: u32) -> usize {
    let s = s as usize;
    if (s + t) % 5 < c {
        4
    } else {
        (s * (c + 1) + t) % 4
    }
}

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn config(&self) -> PathBuf {
        self.path().join("hqisweep.toml")
    }

    pub fn store(&self) -> PathBuf {
        self.path().join("out/results.jsonl")
    }

    pub fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_hqisweep"))
            .args(args)
            .current_dir(self.path())
            .env_remove("RUST_LOG")
            .output()
            .expect("binary runs")
    }

    /// Runs with `--config` appended.
    pub fn cmd(&self, args: &[&str]) -> Output {
        let cfg = self.config();
        let mut all: Vec<&str> = args.to_vec();
        all.extend(["--config", cfg.to_str().unwrap()]);
        self.run(&all)
    }

    pub fn planned_jobs(&self) -> usize {
        TASKS.len() * configs().len() * SAMPLES as usize
    }
}

pub fn workspace(replay_delay_ms: u64) -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    for sub in ["ve", "rt", "stub", "replay", "out"] {
        std::fs::create_dir_all(root.join(sub)).unwrap();
    }

    for (bench_dir, bench) in [("ve", "VerilogEval"), ("rt", "RTLLM")] {
        let mut manifest = format!("benchmark = \"{bench}\"\n");
        for t in TASKS.iter().filter(|t| t.bench == bench) {
            let d = root.join(bench_dir);
            std::fs::write(d.join(format!("{}.txt", t.id)), format!("Implement {}.", t.id)).unwrap();
            std::fs::write(d.join(format!("{}.v", t.id)), golden(t.id)).unwrap();
            std::fs::write(d.join(format!("{}_tb.v", t.id)), "module tb; endmodule\n").unwrap();
            manifest.push_str(&format!(
                "\n[[tasks]]\nid = \"{0}\"\nprompt = \"{0}.txt\"\ngolden = \"{0}.v\"\ntestbench = \"{0}_tb.v\"\ncategory = \"{1}\"\n",
                t.id, t.category
            ));
        }
        std::fs::write(root.join(bench_dir).join("manifest.toml"), manifest).unwrap();
    }

    let stub = root.join("stub");
    for t in &TASKS {
        StubSidecar::pass(20.0, 400.0, 1).write_for(&stub, &candidate(t.id, 0)).unwrap();
        for v in 1..=3 {
            StubSidecar::pass(20.0 + 10.0 * v as f64, 400.0 + 50.0 * v as f64, 1 + v as u64)
                .write_for(&stub, &candidate(t.id, v))
                .unwrap();
        }
        StubSidecar::fail_syntax().write_for(&stub, &candidate(t.id, 4)).unwrap();
    }

    let replay = root.join("replay");
    for (ti, t) in TASKS.iter().enumerate() {
        for (ci, c) in configs().iter().enumerate() {
            for s in 0..SAMPLES {
                let body = format!("Here is the design.\n\n```verilog\n{}```\n", candidate(t.id, variant(ti, ci, s)));
                std::fs::write(replay.join(format!("{}.txt", replay_key(t.id, c, s))), body).unwrap();
            }
        }
    }

    let config = format!(
        r#"seed = 7
store = "out/results.jsonl"
taskset = "out/taskset.json"
samples_per_task = {SAMPLES}
include_default = true
benchmarks = ["ve/manifest.toml", "rt/manifest.toml"]

[[endpoints]]
model = "{MODEL}"
backend = "replay"
replay_dir = "replay"
replay_delay_ms = {replay_delay_ms}

[axes]
temperature = [0.0, 0.4, 0.8]
top_p = [1.0]
repetition_penalty = [1.0]
presence_penalty = [0.0]

[eda]
backend = "stub"
stub_dir = "stub"
baseline_dir = "out/baselines"

[parallelism]
generation = 3
evaluation = 2
"#
    );
    std::fs::write(root.join("hqisweep.toml"), config).unwrap();
    Workspace { dir }
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}
