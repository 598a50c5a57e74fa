//! Ward receiver: decodes frames and turns them into display, buzzer, SMS,
//! broadcast and telemetry effects.
//!
//! The receiver never performs I/O. Every externally visible action comes
//! back as an [`Effect`] for the caller to execute, stamped with the virtual
//! time it was produced.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::TelemetryRecord;
use crate::vitals::{check_anomaly, AnomalyBand, AnomalyKind, VitalsReading};
use crate::wire::{decode_frame, Frame, FrameKind, MessageCode};

pub const LCD_COLS: usize = 16;
pub const IDLE_TEXT: &str = "READY";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReceiverError {
    #[error("room number {0} does not fit two digits")]
    RoomOutOfRange(u32),
}

/// What a caregiver or doctor is being told about.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cause {
    Message(MessageCode),
    BpmLow(f64),
    BpmHigh(f64),
    TempHigh(f64),
}

impl Cause {
    pub fn from_anomaly(kind: AnomalyKind, reading: &VitalsReading) -> Self {
        match kind {
            AnomalyKind::BpmLow => Cause::BpmLow(reading.bpm),
            AnomalyKind::BpmHigh => Cause::BpmHigh(reading.bpm),
            AnomalyKind::TempHigh => Cause::TempHigh(reading.temp_c),
        }
    }

    pub fn text(&self) -> String {
        match self {
            Cause::Message(code) => code.text().to_string(),
            Cause::BpmLow(bpm) => format!("BPM LOW {bpm:.1}"),
            Cause::BpmHigh(bpm) => format!("BPM HIGH {bpm:.1}"),
            Cause::TempHigh(t) => format!("TEMP HIGH {t:.2}"),
        }
    }
}

/// `ROOM NN: <CAUSE>` with a zero-padded two-digit room.
pub fn format_sms(room_no: u32, cause: &Cause) -> Result<String, ReceiverError> {
    if room_no > 99 {
        return Err(ReceiverError::RoomOutOfRange(room_no));
    }
    Ok(format!("ROOM {room_no:02}: {}", cause.text()))
}

/// Left-aligned, space-padded or truncated to exactly one LCD row.
pub fn lcd_row(text: &str) -> String {
    format!("{:<width$.width$}", text, width = LCD_COLS)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Doctor {
    pub name: String,
    pub phone: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    pub caregiver_number: String,
    pub doctors: Vec<Doctor>,
    pub attend_timeout_ms: u64,
    pub anomaly: AnomalyBand,
    pub dedupe_window: usize,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            caregiver_number: "+15550100".into(),
            doctors: vec![
                Doctor { name: "Dr. Rao".into(), phone: "+15550201".into() },
                Doctor { name: "Dr. Iyer".into(), phone: "+15550202".into() },
            ],
            attend_timeout_ms: 30_000,
            anomaly: AnomalyBand::default(),
            dedupe_window: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EffectKind {
    LcdUpdate { row: u8, text: String },
    BuzzerOn,
    BuzzerOff,
    SmsRequest { to: String, body: String },
    AlertBroadcast { room_no: u8, body: String, recipients: Vec<String> },
    Telemetry(TelemetryRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub t_ms: u64,
    pub kind: EffectKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendingRequest {
    pub cause: Cause,
    pub device_id: u16,
    pub room_no: u8,
    pub since_ms: u64,
    /// Set once the caregiver has been texted for this request, by either
    /// the escalate flag or the attendance timeout.
    pub sms_sent: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RxStats {
    pub accepted: u64,
    pub rejected: u64,
    pub duplicates: u64,
    pub messages: u64,
    pub vitals: u64,
}

#[derive(Debug, Clone)]
pub struct Receiver {
    cfg: ReceiverConfig,
    lcd: [String; 2],
    buzzer: bool,
    pending: Option<PendingRequest>,
    recent_seqs: BTreeMap<u16, VecDeque<u8>>,
    /// Ongoing anomaly episode per device; a broadcast goes out on entry.
    episodes: BTreeMap<u16, AnomalyKind>,
    stats: RxStats,
}

impl Receiver {
    pub fn new(cfg: ReceiverConfig) -> Self {
        Self {
            cfg,
            lcd: [lcd_row(IDLE_TEXT), lcd_row("")],
            buzzer: false,
            pending: None,
            recent_seqs: BTreeMap::new(),
            episodes: BTreeMap::new(),
            stats: RxStats::default(),
        }
    }

    pub fn config(&self) -> &ReceiverConfig {
        &self.cfg
    }

    pub fn lcd(&self) -> &[String; 2] {
        &self.lcd
    }

    pub fn buzzer(&self) -> bool {
        self.buzzer
    }

    pub fn pending(&self) -> Option<&PendingRequest> {
        self.pending.as_ref()
    }

    pub fn stats(&self) -> RxStats {
        self.stats
    }

    pub fn set_doctors(&mut self, doctors: Vec<Doctor>) {
        self.cfg.doctors = doctors;
    }

    /// Handle one received datagram. Undecodable or semantically invalid
    /// frames are counted and otherwise ignored.
    pub fn rx_bytes(&mut self, bytes: &[u8], now_ms: u64) -> Vec<Effect> {
        let Ok(frame) = decode_frame(bytes) else {
            self.stats.rejected += 1;
            return Vec::new();
        };
        self.rx_frame(&frame, now_ms)
    }

    pub fn rx_frame(&mut self, frame: &Frame, now_ms: u64) -> Vec<Effect> {
        if frame.room_no > 99 {
            self.stats.rejected += 1;
            return Vec::new();
        }
        enum Body {
            Message(MessageCode),
            Vitals(VitalsReading),
        }
        let body = match frame.kind {
            FrameKind::Message => frame.message_code().map(Body::Message),
            FrameKind::Vitals => frame.vitals_payload().map(|p| {
                Body::Vitals(VitalsReading { bpm: p.bpm(), temp_c: p.temp_c(), t_ms: now_ms })
            }),
        };
        let Some(body) = body else {
            self.stats.rejected += 1;
            return Vec::new();
        };
        if !self.remember_seq(frame.device_id, frame.seq) {
            self.stats.duplicates += 1;
            return Vec::new();
        }
        self.stats.accepted += 1;

        let mut out = Vec::new();
        match body {
            Body::Message(code) => {
                self.stats.messages += 1;
                self.on_message(frame, code, now_ms, &mut out);
            }
            Body::Vitals(reading) => {
                self.stats.vitals += 1;
                self.on_vitals(frame, &reading, now_ms, &mut out);
            }
        }
        out.into_iter().map(|kind| Effect { t_ms: now_ms, kind }).collect()
    }

    /// Returns false when `seq` was already seen recently for this device.
    fn remember_seq(&mut self, device_id: u16, seq: u8) -> bool {
        let window = self.recent_seqs.entry(device_id).or_default();
        if window.contains(&seq) {
            return false;
        }
        window.push_back(seq);
        while window.len() > self.cfg.dedupe_window.max(1) {
            window.pop_front();
        }
        true
    }

    fn on_message(&mut self, frame: &Frame, code: MessageCode, now_ms: u64, out: &mut Vec<EffectKind>) {
        let cause = Cause::Message(code);
        let escalation_of_pending = matches!(
            self.pending,
            Some(p) if p.cause == cause && p.device_id == frame.device_id
        );
        if escalation_of_pending && frame.escalate() {
            if let Some(p) = self.pending.as_mut() {
                if !p.sms_sent {
                    p.sms_sent = true;
                    out.push(self.caregiver_sms(frame.room_no, &cause));
                }
            }
        } else {
            self.open_request(cause, frame, now_ms, out);
            if frame.escalate() {
                if let Some(p) = self.pending.as_mut() {
                    p.sms_sent = true;
                }
                out.push(self.caregiver_sms(frame.room_no, &cause));
            }
        }
        out.push(EffectKind::Telemetry(TelemetryRecord::message(
            frame.device_id,
            frame.room_no,
            now_ms,
            code.text(),
        )));
    }

    fn on_vitals(&mut self, frame: &Frame, reading: &VitalsReading, now_ms: u64, out: &mut Vec<EffectKind>) {
        out.push(EffectKind::Telemetry(TelemetryRecord::vitals(
            frame.device_id,
            frame.room_no,
            now_ms,
            reading.bpm,
            reading.temp_c,
        )));
        let anomaly = reading.is_valid().then(|| check_anomaly(reading, &self.cfg.anomaly)).flatten();
        let Some(kind) = anomaly else {
            self.episodes.remove(&frame.device_id);
            return;
        };
        if self.episodes.insert(frame.device_id, kind) == Some(kind) {
            return;
        }
        let cause = Cause::from_anomaly(kind, reading);
        let body = format_sms(u32::from(frame.room_no), &cause).expect("room checked on receipt");
        out.push(EffectKind::AlertBroadcast {
            room_no: frame.room_no,
            body: body.clone(),
            recipients: self.cfg.doctors.iter().map(|d| d.phone.clone()).collect(),
        });
        out.push(EffectKind::Telemetry(TelemetryRecord::alert(
            frame.device_id,
            frame.room_no,
            now_ms,
            kind,
            body,
        )));
        // A patient request already on screen keeps priority.
        if self.pending.is_none() {
            self.open_request(cause, frame, now_ms, out);
        }
    }

    fn open_request(&mut self, cause: Cause, frame: &Frame, now_ms: u64, out: &mut Vec<EffectKind>) {
        self.pending = Some(PendingRequest {
            cause,
            device_id: frame.device_id,
            room_no: frame.room_no,
            since_ms: now_ms,
            sms_sent: false,
        });
        self.set_row(0, &cause.text(), out);
        self.set_row(1, &format!("ROOM {:02}", frame.room_no), out);
        if !self.buzzer {
            self.buzzer = true;
            out.push(EffectKind::BuzzerOn);
        }
    }

    fn set_row(&mut self, row: u8, text: &str, out: &mut Vec<EffectKind>) {
        let text = lcd_row(text);
        self.lcd[usize::from(row)] = text.clone();
        out.push(EffectKind::LcdUpdate { row, text });
    }

    fn caregiver_sms(&self, room_no: u8, cause: &Cause) -> EffectKind {
        EffectKind::SmsRequest {
            to: self.cfg.caregiver_number.clone(),
            body: format_sms(u32::from(room_no), cause).expect("room checked on receipt"),
        }
    }

    /// Attendance timer: texts the caregiver once when a request has gone
    /// unacknowledged for `attend_timeout_ms`.
    pub fn tick(&mut self, now_ms: u64) -> Vec<Effect> {
        let timeout = self.cfg.attend_timeout_ms;
        let Some(p) = self.pending.as_mut() else {
            return Vec::new();
        };
        if p.sms_sent || now_ms.saturating_sub(p.since_ms) < timeout {
            return Vec::new();
        }
        p.sms_sent = true;
        let (room, cause) = (p.room_no, p.cause);
        vec![Effect { t_ms: now_ms, kind: self.caregiver_sms(room, &cause) }]
    }

    /// A caregiver attended: silence the buzzer and return to the idle screen.
    pub fn acknowledge(&mut self, now_ms: u64) -> Vec<Effect> {
        if self.pending.take().is_none() {
            return Vec::new();
        }
        let mut out = Vec::new();
        self.buzzer = false;
        out.push(EffectKind::BuzzerOff);
        self.set_row(0, IDLE_TEXT, &mut out);
        self.set_row(1, "", &mut out);
        out.into_iter().map(|kind| Effect { t_ms: now_ms, kind }).collect()
    }
}
