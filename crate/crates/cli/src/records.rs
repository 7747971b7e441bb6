//! Per-state event records, one JSON object per line after a header line.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use qcrevival_core::sweep::SweepStop;
use qcrevival_core::{ChannelKind, EventRecord, Measure, OptimizerSettings, Rank, Sides};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const SCHEMA: &str = "qcrevival-records";
pub const VERSION: u32 = 1;
pub const FILE_NAME: &str = "records.jsonl";

/// Everything that determines the content of a record file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSettings {
    pub kind: ChannelKind,
    pub sides: Sides,
    pub rank: Rank,
    pub ensemble_count: usize,
    pub master_seed: u64,
    pub grid_steps: usize,
    pub zero_threshold: f64,
    pub measures: Vec<Measure>,
    pub alphas: Vec<f64>,
    pub sweep_stop: SweepStop,
    pub optimizer: OptimizerSettings,
}

impl From<&RunConfig> for RecordSettings {
    fn from(c: &RunConfig) -> Self {
        Self {
            kind: c.kind,
            sides: c.sides,
            rank: c.rank,
            ensemble_count: c.ensemble_count,
            master_seed: c.master_seed,
            grid_steps: c.grid_steps,
            zero_threshold: c.zero_threshold,
            measures: c.measures.clone(),
            alphas: c.alphas.clone(),
            sweep_stop: c.sweep_stop,
            optimizer: c.optimizer(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema: String,
    pub version: u32,
    pub settings: RecordSettings,
}

impl Header {
    pub fn new(settings: RecordSettings) -> Self {
        Self {
            schema: SCHEMA.into(),
            version: VERSION,
            settings,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellEvent {
    pub alpha: f64,
    pub measure: Measure,
    pub record: EventRecord,
    pub non_psd_points: usize,
}

/// All cells of one state, in (alpha, measure) config order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub index: usize,
    pub events: Vec<CellEvent>,
}

pub fn records_path(dir: &Path) -> PathBuf {
    dir.join(FILE_NAME)
}

/// Contents of a record file. `valid_bytes` ends after the last complete line.
#[derive(Debug)]
pub struct RecordFile {
    pub header: Header,
    pub states: Vec<StateRecord>,
    pub valid_bytes: u64,
    pub truncated_tail: bool,
}

pub fn read_records(path: &Path) -> Result<RecordFile> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let bad = |line: usize, message: String| CliError::Records {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut buf = String::new();
    let mut valid_bytes = reader.read_line(&mut buf).map_err(|e| CliError::io(path, e))? as u64;
    if !buf.ends_with('\n') {
        return Err(bad(1, "missing or incomplete header line".into()));
    }
    let header: Header = serde_json::from_str(&buf).map_err(|e| bad(1, e.to_string()))?;
    if header.schema != SCHEMA || header.version != VERSION {
        return Err(bad(
            1,
            format!("unsupported schema {} v{} (expected {SCHEMA} v{VERSION})", header.schema, header.version),
        ));
    }

    let mut states = Vec::new();
    let mut truncated_tail = false;
    let mut line_no = 1;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        if !buf.ends_with('\n') {
            // interrupted write: everything before it is still good
            truncated_tail = true;
            break;
        }
        let rec: StateRecord = serde_json::from_str(&buf).map_err(|e| bad(line_no, e.to_string()))?;
        if rec.index != states.len() {
            return Err(bad(line_no, format!("expected state {}, found {}", states.len(), rec.index)));
        }
        states.push(rec);
        valid_bytes += n as u64;
    }
    Ok(RecordFile {
        header,
        states,
        valid_bytes,
        truncated_tail,
    })
}

/// Appends records to a file, creating it with a header or resuming an
/// existing one written with the same settings.
pub struct RecordWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl RecordWriter {
    /// Returns the writer and the records already on disk.
    pub fn open(path: &Path, settings: &RecordSettings) -> Result<(Self, Vec<StateRecord>)> {
        let header = Header::new(settings.clone());
        if path.exists() {
            let existing = read_records(path)?;
            if existing.header != header {
                return Err(CliError::Config(format!(
                    "{} was written with different settings; remove it or choose another output_dir",
                    path.display()
                )));
            }
            if existing.states.len() > settings.ensemble_count {
                return Err(CliError::Config(format!(
                    "{} holds {} states, more than ensemble_count",
                    path.display(),
                    existing.states.len()
                )));
            }
            let file = OpenOptions::new().write(true).open(path).map_err(|e| CliError::io(path, e))?;
            file.set_len(existing.valid_bytes).map_err(|e| CliError::io(path, e))?;
            let mut out = BufWriter::new(file);
            use std::io::Seek;
            out.seek(std::io::SeekFrom::End(0)).map_err(|e| CliError::io(path, e))?;
            if existing.truncated_tail {
                log::warn!("dropped an incomplete trailing record in {}", path.display());
            }
            Ok((Self { path: path.into(), out }, existing.states))
        } else {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = Self {
                path: path.into(),
                out: BufWriter::new(file),
            };
            w.write_line(&header)?;
            w.flush()?;
            Ok((w, vec![]))
        }
    }

    fn write_line<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let line = serde_json::to_string(value).expect("records serialize");
        writeln!(self.out, "{line}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn append(&mut self, states: &[StateRecord]) -> Result<()> {
        for s in states {
            self.write_line(s)?;
        }
        self.flush()
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))?;
        self.out.get_ref().sync_data().map_err(|e| CliError::io(&self.path, e))
    }
}
