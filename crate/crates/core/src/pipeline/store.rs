//! JSONL transcript persistence and the run manifest sidecar.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::RunConfig;
use crate::dialogue::Transcript;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Appends transcripts to a JSONL file, one complete line per write.
#[derive(Debug)]
pub struct TranscriptWriter {
    path: PathBuf,
    file: Mutex<File>,
}

impl TranscriptWriter {
    pub fn append_to(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let path = path.into();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    /// Creates or truncates the file.
    pub fn create(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let path = path.into();
        File::create(&path).map_err(io_err(&path))?;
        Self::append_to(path)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, transcript: &Transcript) -> Result<(), StoreError> {
        let mut line = serde_json::to_string(transcript).expect("transcripts serialize");
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(line.as_bytes()).map_err(io_err(&self.path))?;
        file.flush().map_err(io_err(&self.path))
    }
}

/// Writes batch results in input order regardless of completion order.
/// Slots may be empty (`None`) when a dialogue produced nothing to persist.
#[derive(Debug)]
pub struct OrderedWriter<'w> {
    writer: &'w TranscriptWriter,
    state: Mutex<(usize, BTreeMap<usize, Option<Transcript>>)>,
}

impl<'w> OrderedWriter<'w> {
    pub fn new(writer: &'w TranscriptWriter) -> Self {
        Self {
            writer,
            state: Mutex::new((0, BTreeMap::new())),
        }
    }

    pub fn submit(&self, index: usize, transcript: Option<Transcript>) -> Result<(), StoreError> {
        let mut guard = self.state.lock().unwrap_or_else(|e| e.into_inner());
        let (next, pending) = &mut *guard;
        pending.insert(index, transcript);
        while let Some(slot) = pending.remove(next) {
            if let Some(t) = slot {
                self.writer.append(&t)?;
            }
            *next += 1;
        }
        Ok(())
    }
}

/// Raw non-blank lines with their 1-based line numbers.
pub fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

pub fn parse_line(line_number: usize, line: &str) -> Result<Transcript, StoreError> {
    serde_json::from_str(line).map_err(|e| StoreError::Parse {
        line: line_number,
        detail: e.to_string(),
    })
}

pub fn load_transcripts(path: &Path) -> Result<Vec<Transcript>, StoreError> {
    read_lines(path)?
        .into_iter()
        .map(|(n, line)| parse_line(n, &line))
        .collect()
}

/// One image that did not yield a completed transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub index: usize,
    pub image_ref: String,
    /// Turn at which the dialogue stopped, when it got that far.
    pub turn: Option<usize>,
    pub error: String,
    /// Whether a partial transcript was written.
    pub persisted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub images: usize,
    pub completed: usize,
    pub failures: Vec<BatchFailure>,
}

/// `out.jsonl` → `out.manifest.json`.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "transcripts".into());
    output.with_file_name(format!("{stem}.manifest.json"))
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), StoreError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(io_err(path))
    }
}
