// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::EdaError;

#[derive(Debug, Clone, Default)]
pub(crate) struct CommandRun {
    pub success: bool,
    pub timed_out: bool,
    pub output: String,
}

/// Replaces `{name}` placeholders in every argument.
pub(crate) fn expand(argv: &[String], vars: &BTreeMap<&str, String>) -> Vec<String> {
    argv.iter()
        .map(|a| {
            let mut s = a.clone();
            for (k, v) in vars {
                s = s.replace(&format!("{{{k}}}"), v);
            }
            s
        })
        .collect()
}

/// Runs `argv` in `cwd`, capturing stdout then stderr. The child is killed
/// when `timeout` elapses.
pub(crate) fn run(argv: &[String], cwd: &Path, timeout: Duration) -> Result<CommandRun, EdaError> {
    let (program, args) = argv
        .split_first()
        .ok_or_else(|| EdaError::Config("empty command template".into()))?;
    let mut child = Command::new(program)
        .args(args)
        .current_dir(cwd)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => EdaError::ToolMissing(program.clone()),
            _ => EdaError::Io(format!("spawning {program}: {e}")),
        })?;

    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let out_reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        buf
    });
    let err_reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr.read_to_end(&mut buf);
        buf
    });

    let status = child.wait_timeout(timeout).map_err(|e| EdaError::Io(e.to_string()))?;
    let (status, timed_out) = match status {
        Some(s) => (Some(s), false),
        None => {
            let _ = child.kill();
            let _ = child.wait();
            (None, true)
        }
    };
    let mut output = String::from_utf8_lossy(&out_reader.join().unwrap_or_default()).into_owned();
    output.push_str(&String::from_utf8_lossy(&err_reader.join().unwrap_or_default()));
    if timed_out {
        output.push_str(&format!("\n[timed out after {}s]\n", timeout.as_secs_f64()));
    } else if let Some(code) = status.and_then(|s| s.code()).filter(|&c| c != 0) {
        output.push_str(&format!("\n[exit status {code}]\n"));
    }
    Ok(CommandRun {
        success: status.is_some_and(|s| s.success()),
        timed_out,
        output,
    })
}
