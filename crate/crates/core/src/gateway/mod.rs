//! Telemetry gateway: an append-only record log with per-patient and alert
//! indexes, queried by remote monitoring clients.
//!
//! The log holds one JSON record per line. The in-memory index is derived
//! from it alone, so replaying the log reproduces every query answer.

#[cfg(feature = "server")]
pub mod http;
mod record;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

pub use record::{RecordKind, TelemetryRecord, ValidationError};

pub const DEFAULT_HISTORY_LIMIT: usize = 100;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid record: {0}")]
    Validation(#[from] ValidationError),
    #[error("storage: {0}")]
    Storage(#[from] io::Error),
    #[error("log line {line}: {source}")]
    CorruptLog { line: usize, source: serde_json::Error },
    #[error("log line {line}: id {id} out of order")]
    OutOfOrder { line: usize, id: u64 },
    #[error("unknown device {0}")]
    NotFound(u16),
    #[error("limit must be at least 1")]
    BadLimit,
}

/// How much of a log file replayed cleanly.
#[derive(Default)]
struct Extent {
    bytes: u64,
    missing_newline: bool,
}

/// Ordering used by every query: ascending time, then arrival.
fn order_key(r: &TelemetryRecord) -> (u64, u64) {
    (r.t_ms, r.id)
}

#[derive(Default)]
pub struct Store {
    records: Vec<TelemetryRecord>,
    /// Positions into `records`, each list sorted by `order_key`.
    by_device: BTreeMap<u16, Vec<usize>>,
    alerts: Vec<usize>,
    log: Option<Box<dyn Write + Send + Sync>>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("records", &self.records.len())
            .field("devices", &self.by_device.len())
            .field("alerts", &self.alerts.len())
            .field("persistent", &self.log.is_some())
            .finish()
    }
}

impl Store {
    /// A store with no backing log.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// A store that appends every accepted record to `sink`.
    pub fn with_log(sink: impl Write + Send + Sync + 'static) -> Self {
        Self { log: Some(Box::new(sink)), ..Self::default() }
    }

    /// Open (or create) a log file, replay it, and keep appending to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let path = path.as_ref();
        let (mut store, valid) = match File::open(path) {
            Ok(f) => Self::replay_with_extent(BufReader::new(f))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => (Self::default(), Extent::default()),
            Err(e) => return Err(e.into()),
        };
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        // Cut a torn tail so new lines start on a clean boundary.
        if file.metadata()?.len() > valid.bytes {
            file.set_len(valid.bytes)?;
        }
        if valid.missing_newline {
            file.write_all(b"\n")?;
        }
        store.log = Some(Box::new(file));
        Ok(store)
    }

    /// Rebuild the index from a log. A final line without its newline is a
    /// torn write and is dropped when it does not parse.
    pub fn replay(reader: impl BufRead) -> Result<Self, GatewayError> {
        Self::replay_with_extent(reader).map(|(store, _)| store)
    }

    fn replay_with_extent(mut reader: impl BufRead) -> Result<(Self, Extent), GatewayError> {
        let mut store = Self::default();
        let mut extent = Extent::default();
        let mut buf = String::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            let n = reader.read_line(&mut buf)?;
            if n == 0 {
                break;
            }
            line_no += 1;
            let complete = buf.ends_with('\n');
            let line = buf.trim();
            if !line.is_empty() {
                let record: TelemetryRecord = match serde_json::from_str(line) {
                    Ok(r) => r,
                    Err(_) if !complete => break,
                    Err(source) => return Err(GatewayError::CorruptLog { line: line_no, source }),
                };
                record.validate()?;
                if record.id != store.records.len() as u64 + 1 {
                    return Err(GatewayError::OutOfOrder { line: line_no, id: record.id });
                }
                store.index(record);
            }
            extent.bytes += n as u64;
            extent.missing_newline = !complete;
        }
        Ok((store, extent))
    }

    fn index(&mut self, record: TelemetryRecord) {
        let pos = self.records.len();
        let key = order_key(&record);
        let list = self.by_device.entry(record.device_id).or_default();
        let at = list.partition_point(|&i| order_key(&self.records[i]) <= key);
        list.insert(at, pos);
        if record.kind == RecordKind::Alert {
            let at = self.alerts.partition_point(|&i| order_key(&self.records[i]) <= key);
            self.alerts.insert(at, pos);
        }
        self.records.push(record);
    }

    /// Validate, assign the next id, append to the log, then index. The
    /// record is durable in the log before this returns.
    pub fn ingest(&mut self, mut record: TelemetryRecord) -> Result<u64, GatewayError> {
        record.validate()?;
        record.id = self.records.len() as u64 + 1;
        if let Some(log) = self.log.as_mut() {
            let line = serde_json::to_string(&record).map_err(io::Error::other)?;
            writeln!(log, "{line}")?;
            log.flush()?;
        }
        let id = record.id;
        self.index(record);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All records in arrival order.
    pub fn records(&self) -> &[TelemetryRecord] {
        &self.records
    }

    pub fn devices(&self) -> impl Iterator<Item = u16> + '_ {
        self.by_device.keys().copied()
    }

    fn device(&self, device_id: u16) -> Result<&[usize], GatewayError> {
        self.by_device
            .get(&device_id)
            .map(Vec::as_slice)
            .ok_or(GatewayError::NotFound(device_id))
    }

    /// Record with the greatest `t_ms`; ties go to the larger id.
    pub fn latest(&self, device_id: u16) -> Result<&TelemetryRecord, GatewayError> {
        let list = self.device(device_id)?;
        let &last = list.last().ok_or(GatewayError::NotFound(device_id))?;
        Ok(&self.records[last])
    }

    pub fn history(
        &self,
        device_id: u16,
        since_ms: u64,
        limit: usize,
    ) -> Result<Vec<&TelemetryRecord>, GatewayError> {
        if limit == 0 {
            return Err(GatewayError::BadLimit);
        }
        let list = self.device(device_id)?;
        let start = list.partition_point(|&i| self.records[i].t_ms < since_ms);
        Ok(list[start..].iter().take(limit).map(|&i| &self.records[i]).collect())
    }

    pub fn alerts(&self, since_ms: u64) -> Vec<&TelemetryRecord> {
        let start = self.alerts.partition_point(|&i| self.records[i].t_ms < since_ms);
        self.alerts[start..].iter().map(|&i| &self.records[i]).collect()
    }

    fn latest_of_kind(&self, device_id: u16, kind: RecordKind) -> Option<&TelemetryRecord> {
        self.by_device
            .get(&device_id)?
            .iter()
            .rev()
            .map(|&i| &self.records[i])
            .find(|r| r.kind == kind)
    }

    /// Plain-text overview: a header, then one line per device.
    pub fn status_page(&self) -> String {
        let mut out = format!(
            "PARACOM GATEWAY STATUS devices={} records={} alerts={}\n",
            self.by_device.len(),
            self.records.len(),
            self.alerts.len()
        );
        for device in self.devices() {
            let Ok(latest) = self.latest(device) else { continue };
            let message = self
                .latest_of_kind(device, RecordKind::Message)
                .and_then(|r| r.message_text.as_deref())
                .unwrap_or("-");
            let (bpm, temp) = match self.latest_of_kind(device, RecordKind::Vitals) {
                Some(r) => (
                    format!("{:.1}", r.bpm.unwrap_or_default()),
                    format!("{:.2}", r.temp_c.unwrap_or_default()),
                ),
                None => ("-".into(), "-".into()),
            };
            let _ = writeln!(
                out,
                "device={:#06x} room={:02} last_seen_ms={} last_kind={} message=\"{}\" bpm={} temp={}",
                device,
                latest.room_no,
                latest.t_ms,
                kind_name(latest.kind),
                message,
                bpm,
                temp,
            );
        }
        out
    }
}

fn kind_name(kind: RecordKind) -> &'static str {
    match kind {
        RecordKind::Vitals => "vitals",
        RecordKind::Message => "message",
        RecordKind::Alert => "alert",
    }
}
