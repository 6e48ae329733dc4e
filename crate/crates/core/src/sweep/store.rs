// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{JobKey, ResultRecord, SweepError, SCHEMA_VERSION};

const FORMAT: &str = "hqisweep-results";

/// First line of every store file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreHeader {
    pub format: String,
    pub schema_version: u32,
    /// Run-level seed every generation seed derives from.
    pub seed: u64,
}

/// Append-only JSON-lines result store.
///
/// The first line is a [`StoreHeader`]; every further line is one
/// [`ResultRecord`]. Opening rebuilds the in-memory index. A torn final line
/// (an interrupted append) is dropped, and the file is then rewritten
/// atomically without it. A later record for a key supersedes earlier ones.
pub struct Store {
    path: PathBuf,
    header: StoreHeader,
    index: BTreeMap<String, ResultRecord>,
    writer: Option<BufWriter<File>>,
}

impl Store {
    fn err(path: &Path, message: impl Into<String>) -> SweepError {
        SweepError::Store { path: path.display().to_string(), message: message.into() }
    }

    /// Opens for appending, creating the file when absent. An existing store
    /// must carry the same seed.
    pub fn open(path: impl Into<PathBuf>, seed: u64) -> Result<Store, SweepError> {
        let path = path.into();
        let mut store = if path.exists() {
            let s = Self::read(&path)?;
            if s.header.seed != seed {
                return Err(Self::err(
                    &path,
                    format!("store was created with seed {} but the run uses seed {seed}", s.header.seed),
                ));
            }
            s
        } else {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Self::err(&path, e.to_string()))?;
            }
            let header = StoreHeader { format: FORMAT.into(), schema_version: SCHEMA_VERSION, seed };
            let s = Store { path, header, index: BTreeMap::new(), writer: None };
            s.rewrite()?;
            s
        };
        let file = OpenOptions::new().append(true).open(&store.path).map_err(|e| Self::err(&store.path, e.to_string()))?;
        store.writer = Some(BufWriter::new(file));
        Ok(store)
    }

    /// Opens an existing store without write access.
    pub fn open_read_only(path: impl AsRef<Path>) -> Result<Store, SweepError> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Self::err(path, "no such store"));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Self::err(path, e.to_string()))?;
        let (store, _) = Self::parse(path, &text)?;
        Ok(store)
    }

    fn read(path: &Path) -> Result<Store, SweepError> {
        let text = std::fs::read_to_string(path).map_err(|e| Self::err(path, e.to_string()))?;
        let (store, dirty) = Self::parse(path, &text)?;
        if dirty {
            log::warn!("{}: dropping an incomplete trailing record and compacting", path.display());
            store.rewrite()?;
        }
        Ok(store)
    }

    /// Returns the store and whether the file needs compaction.
    fn parse(path: &Path, text: &str) -> Result<(Store, bool), SweepError> {
        let mut lines = text.split_inclusive('\n').peekable();
        let header_line = lines.next().ok_or_else(|| Self::err(path, "empty file, missing header"))?;
        let header: StoreHeader =
            serde_json::from_str(header_line.trim_end()).map_err(|e| Self::err(path, format!("bad header: {e}")))?;
        if header.format != FORMAT {
            return Err(Self::err(path, format!("not a result store (format `{}`)", header.format)));
        }
        if header.schema_version != SCHEMA_VERSION {
            return Err(Self::err(path, format!("unsupported schema version {}", header.schema_version)));
        }
        let mut index = BTreeMap::new();
        let mut records = 0usize;
        let mut dirty = false;
        let mut line_no = 1;
        while let Some(line) = lines.next() {
            line_no += 1;
            let last = lines.peek().is_none();
            if line.trim().is_empty() {
                continue;
            }
            match (serde_json::from_str::<ResultRecord>(line.trim_end()), line.ends_with('\n')) {
                (Ok(r), true) => {
                    records += 1;
                    index.insert(r.key.canonical(), r);
                }
                _ if last => dirty = true,
                (Err(e), _) => return Err(Self::err(path, format!("line {line_no} is corrupt: {e}"))),
                (Ok(_), false) => unreachable!("only the final line can lack a newline"),
            }
        }
        dirty |= records != index.len();
        Ok((Store { path: path.to_path_buf(), header, index, writer: None }, dirty))
    }

    /// Atomically replaces the file with the header and one line per key.
    fn rewrite(&self) -> Result<(), SweepError> {
        let dir = self.path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let e = |e: std::io::Error| Self::err(&self.path, e.to_string());
        let tmp = tempfile::NamedTempFile::new_in(dir).map_err(e)?;
        {
            let mut w = BufWriter::new(tmp.as_file());
            writeln!(w, "{}", serde_json::to_string(&self.header).expect("header serializes")).map_err(e)?;
            for r in self.index.values() {
                writeln!(w, "{}", serde_json::to_string(r).expect("record serializes")).map_err(e)?;
            }
            w.flush().map_err(e)?;
        }
        tmp.as_file().sync_all().map_err(e)?;
        tmp.persist(&self.path).map_err(|x| e(x.error))?;
        Ok(())
    }

    /// Drops superseded lines from the file.
    pub fn compact(&mut self) -> Result<(), SweepError> {
        self.flush()?;
        self.rewrite()?;
        if self.writer.is_some() {
            let file = OpenOptions::new().append(true).open(&self.path).map_err(|e| Self::err(&self.path, e.to_string()))?;
            self.writer = Some(BufWriter::new(file));
        }
        Ok(())
    }

    /// Appends one record and flushes it to the file.
    pub fn append(&mut self, record: ResultRecord) -> Result<(), SweepError> {
        let path = self.path.clone();
        let w = self.writer.as_mut().ok_or_else(|| Self::err(&path, "store is read-only"))?;
        let line = serde_json::to_string(&record).expect("record serializes");
        w.write_all(line.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .and_then(|_| w.flush())
            .map_err(|e| Self::err(&path, format!("write failed: {e}")))?;
        self.index.insert(record.key.canonical(), record);
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), SweepError> {
        if let Some(w) = self.writer.as_mut() {
            w.flush().map_err(|e| Self::err(&self.path, e.to_string()))?;
        }
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn header(&self) -> &StoreHeader {
        &self.header
    }

    pub fn get(&self, key: &JobKey) -> Option<&ResultRecord> {
        self.index.get(&key.canonical())
    }

    pub fn contains(&self, key: &JobKey) -> bool {
        self.index.contains_key(&key.canonical())
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Records in canonical key order.
    pub fn records(&self) -> impl Iterator<Item = &ResultRecord> {
        self.index.values()
    }
}
