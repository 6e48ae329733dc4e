// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use super::{EdaError, Evaluator};
use crate::taskset::Task;
use crate::GoldenBaseline;

/// Golden baselines keyed by task, golden design and toolchain fingerprint.
///
/// Reads are concurrent; the first computation of each key is serialized so
/// the tools run once per key. With a directory, entries persist as
/// `<dir>/<key>.json`.
#[derive(Default)]
pub struct BaselineCache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, GoldenBaseline>>,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl BaselineCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn persistent(dir: impl Into<PathBuf>) -> Self {
        BaselineCache { dir: Some(dir.into()), ..Self::default() }
    }

    pub fn key(task: &Task, fingerprint: &str) -> String {
        hex::encode(Sha256::digest(format!("{}|{}|{fingerprint}", task.id, task.canonical_hash())))
    }

    fn load(&self, key: &str) -> Result<Option<GoldenBaseline>, EdaError> {
        if let Some(b) = self.memory.lock().expect("cache lock").get(key) {
            return Ok(Some(b.clone()));
        }
        let Some(dir) = &self.dir else { return Ok(None) };
        let path = dir.join(format!("{key}.json"));
        match std::fs::read_to_string(&path) {
            Ok(text) => {
                let b: GoldenBaseline = serde_json::from_str(&text)
                    .map_err(|e| EdaError::Io(format!("corrupt baseline {}: {e}", path.display())))?;
                self.memory.lock().expect("cache lock").insert(key.to_string(), b.clone());
                Ok(Some(b))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(EdaError::Io(format!("{}: {e}", path.display()))),
        }
    }

    fn store(&self, key: &str, b: &GoldenBaseline) -> Result<(), EdaError> {
        if let Some(dir) = &self.dir {
            let io = |e: std::io::Error| EdaError::Io(format!("{}: {e}", dir.display()));
            std::fs::create_dir_all(dir).map_err(io)?;
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(serde_json::to_string_pretty(b).expect("baseline serializes").as_bytes()).map_err(io)?;
            tmp.persist(dir.join(format!("{key}.json"))).map_err(|e| io(e.error))?;
        }
        self.memory.lock().expect("cache lock").insert(key.to_string(), b.clone());
        Ok(())
    }

    /// Cached baseline, or the golden run under `evaluator` on a miss.
    pub fn get_or_compute(&self, evaluator: &Evaluator, task: &Task) -> Result<GoldenBaseline, EdaError> {
        let key = Self::key(task, &evaluator.fingerprint()?);
        if let Some(b) = self.load(&key)? {
            return Ok(b);
        }
        let lock = self.locks.lock().expect("cache lock").entry(key.clone()).or_default().clone();
        let _guard = lock.lock().expect("key lock");
        if let Some(b) = self.load(&key)? {
            return Ok(b);
        }
        let b = evaluator.compute_golden_baseline(task)?;
        self.store(&key, &b)?;
        Ok(b)
    }
}
