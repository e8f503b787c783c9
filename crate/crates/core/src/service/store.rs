//! On-disk study storage: the append-only event log plus periodic snapshots.
//!
//! ```text
//! <data-dir>/study.json      study config, written once
//! <data-dir>/events.jsonl    every log record, one per line
//! <data-dir>/snapshot.json   study state as of some sequence number
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::clock::Clock;
use crate::study::{read_jsonl, write_jsonl, LogRecord, Study, StudyConfig, StudyError, StudyState};

pub const CONFIG_FILE: &str = "study.json";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("snapshot is at sequence {snapshot} but the log ends at {log}")]
    SnapshotAhead { snapshot: u64, log: u64 },
    #[error(transparent)]
    Study(#[from] StudyError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub struct Store {
    dir: PathBuf,
    events: BufWriter<File>,
    /// Records of `study.log()` already on disk.
    persisted: usize,
    since_snapshot: u64,
    snapshot_every: u64,
}

impl Store {
    /// Opens or creates a data directory and rebuilds the study it holds.
    /// `config` is used only when the directory holds no study yet.
    pub fn open(
        dir: impl Into<PathBuf>,
        config: StudyConfig,
        clock: Arc<dyn Clock>,
        snapshot_every: u64,
    ) -> Result<(Store, Study), StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;

        let config_path = dir.join(CONFIG_FILE);
        let config = if config_path.exists() {
            let text = fs::read_to_string(&config_path).map_err(io_err(&config_path))?;
            serde_json::from_str(&text).map_err(|source| StoreError::Json {
                path: config_path.clone(),
                source,
            })?
        } else {
            config.validate()?;
            let text = serde_json::to_string_pretty(&config).expect("config serializes");
            write_atomic(&config_path, text.as_bytes())?;
            config
        };

        let events_path = dir.join(EVENTS_FILE);
        let records = read_log_file(&events_path)?;
        let last_seq = records.last().map_or(0, |r| r.seq);

        let snapshot_path = dir.join(SNAPSHOT_FILE);
        let study = if snapshot_path.exists() {
            let text = fs::read_to_string(&snapshot_path).map_err(io_err(&snapshot_path))?;
            let state: StudyState = serde_json::from_str(&text).map_err(|source| StoreError::Json {
                path: snapshot_path.clone(),
                source,
            })?;
            if state.next_seq > last_seq + 1 {
                return Err(StoreError::SnapshotAhead {
                    snapshot: state.next_seq - 1,
                    log: last_seq,
                });
            }
            let mut study = Study::from_snapshot(state, clock)?;
            study.replay_records(&records)?;
            study
        } else {
            Study::replay(config, &records, clock)?
        };

        let events = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&events_path)
            .map_err(io_err(&events_path))?;
        let store = Store {
            dir,
            events: BufWriter::new(events),
            persisted: study.log().len(),
            since_snapshot: 0,
            snapshot_every,
        };
        Ok((store, study))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Appends records the study produced since the last call, and writes a
    /// snapshot every `snapshot_every` records.
    pub fn persist(&mut self, study: &Study) -> Result<(), StoreError> {
        let new = &study.log()[self.persisted..];
        if new.is_empty() {
            return Ok(());
        }
        let path = self.dir.join(EVENTS_FILE);
        write_jsonl(new, &mut self.events).map_err(io_err(&path))?;
        self.events.flush().map_err(io_err(&path))?;
        self.persisted += new.len();
        self.since_snapshot += new.len() as u64;
        if self.snapshot_every > 0 && self.since_snapshot >= self.snapshot_every {
            self.snapshot(study)?;
        }
        Ok(())
    }

    pub fn snapshot(&mut self, study: &Study) -> Result<(), StoreError> {
        let text = serde_json::to_vec(study.state()).expect("state serializes");
        write_atomic(&self.dir.join(SNAPSHOT_FILE), &text)?;
        self.since_snapshot = 0;
        Ok(())
    }

    /// The full log as stored on disk.
    pub fn read_log(&self) -> Result<Vec<LogRecord>, StoreError> {
        read_log_file(&self.dir.join(EVENTS_FILE))
    }
}

pub fn read_log_file(path: &Path) -> Result<Vec<LogRecord>, StoreError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).map_err(io_err(path))?;
    read_jsonl(BufReader::new(file)).map_err(io_err(path))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}
