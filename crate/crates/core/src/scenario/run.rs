use std::io::Write;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::parse::{Directive, Scenario};
use crate::gateway::Store;
use crate::gesture::AccelSample;
use crate::modem::{Modem, SmsRecord};
use crate::receiver::{Effect, EffectKind, Receiver, IDLE_TEXT};
use crate::transmitter::Transmitter;
use crate::vitals::VitalsReading;
use crate::wire::{encode_frame, Channel, ChannelConfig, ChannelStats, Frame, FrameKind};

/// Simulated time kept running after the last scheduled instant, so
/// trailing repeats and timers settle.
pub const TAIL_MS: u64 = 500;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub t_ms: u64,
    pub source: String,
    pub description: String,
}

/// Everything that happened during a run, in (time, insertion) order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    entries: Vec<LogEntry>,
}

impl EventLog {
    pub fn push(&mut self, t_ms: u64, source: &str, description: impl Into<String>) {
        debug_assert!(self.entries.last().is_none_or(|e| e.t_ms <= t_ms));
        self.entries.push(LogEntry { t_ms, source: source.into(), description: description.into() });
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{:>9} {:<8} {}\n", e.t_ms, e.source, e.description))
            .collect()
    }

    /// One JSON object per line.
    pub fn to_lines(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("log entries serialize") + "\n")
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationResult {
    pub line: usize,
    pub t_ms: u64,
    pub description: String,
    pub passed: bool,
}

/// Write sink shared between a component and whoever inspects its output.
#[derive(Debug, Clone, Default)]
pub struct SharedBuffer(Arc<Mutex<Vec<u8>>>);

impl SharedBuffer {
    pub fn contents(&self) -> Vec<u8> {
        self.0.lock().map(|b| b.clone()).unwrap_or_default()
    }
}

impl Write for SharedBuffer {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0
            .lock()
            .map_err(|_| std::io::Error::other("buffer lock poisoned"))?
            .extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

pub struct RunReport {
    pub log: EventLog,
    pub expectations: Vec<ExpectationResult>,
    pub lcd: [String; 2],
    /// Every row-0 text shown, with its time, starting from the idle screen.
    pub lcd_history: Vec<(u64, String)>,
    /// Caregiver texts (escalations and timeouts), as `(t_ms, body)`.
    pub caregiver_sms: Vec<(u64, String)>,
    /// Doctor broadcasts, as `(t_ms, body, recipients)`.
    pub broadcasts: Vec<(u64, String, Vec<String>)>,
    pub outbox: Vec<SmsRecord>,
    /// Outbox log, one JSON record per line.
    pub outbox_log: Vec<u8>,
    pub store: Store,
    /// Gateway persistence log, one JSON record per line.
    pub telemetry_log: Vec<u8>,
    pub channel: ChannelStats,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.expectations.iter().all(|e| e.passed)
    }
}

struct Sim {
    tx: Transmitter,
    channel: Channel,
    rx: Receiver,
    modem: Modem,
    store: Store,
    log: EventLog,
    lcd_history: Vec<(u64, String)>,
    caregiver_sms: Vec<(u64, String)>,
    broadcasts: Vec<(u64, String, Vec<String>)>,
}

fn describe_frame(f: &Frame) -> String {
    match f.kind {
        FrameKind::Message => format!(
            "frame seq={} dev={:#06x} room={:02} message={} escalate={}",
            f.seq,
            f.device_id,
            f.room_no,
            f.message_code().map(|c| c.text()).unwrap_or("?"),
            f.escalate()
        ),
        FrameKind::Vitals => {
            let (bpm, temp) =
                f.vitals_payload().map(|p| (p.bpm(), p.temp_c())).unwrap_or((f64::NAN, f64::NAN));
            format!(
                "frame seq={} dev={:#06x} room={:02} vitals bpm={bpm:.1} temp={temp:.2}",
                f.seq, f.device_id, f.room_no
            )
        }
    }
}

impl Sim {
    fn execute(&mut self, effects: Vec<Effect>) {
        for Effect { t_ms: t, kind } in effects {
            match kind {
                EffectKind::LcdUpdate { row, text } => {
                    self.log.push(t, "lcd", format!("row{row} \"{text}\""));
                    if row == 0 {
                        self.lcd_history.push((t, text));
                    }
                }
                EffectKind::BuzzerOn => self.log.push(t, "buzzer", "on"),
                EffectKind::BuzzerOff => self.log.push(t, "buzzer", "off"),
                EffectKind::SmsRequest { to, body } => {
                    self.send(t, &to, &body);
                    self.caregiver_sms.push((t, body));
                }
                EffectKind::AlertBroadcast { room_no, body, recipients } => {
                    self.log.push(
                        t,
                        "rx",
                        format!("alert room={room_no:02} \"{body}\" to {} doctor(s)", recipients.len()),
                    );
                    for to in &recipients {
                        self.send(t, to, &body);
                    }
                    self.broadcasts.push((t, body, recipients));
                }
                EffectKind::Telemetry(record) => {
                    let kind = serde_json::to_string(&record.kind).unwrap_or_default();
                    match self.store.ingest(record) {
                        Ok(id) => self.log.push(t, "gateway", format!("ingest id={id} kind={}", kind.trim_matches('"'))),
                        Err(e) => self.log.push(t, "gateway", format!("ingest failed: {e}")),
                    }
                }
            }
        }
    }

    fn send(&mut self, t: u64, to: &str, body: &str) {
        match self.modem.send_sms(to, body, t) {
            Ok(index) => self.log.push(t, "modem", format!("sms #{index} to {to} \"{body}\"")),
            Err(e) => self.log.push(t, "modem", format!("sms to {to} failed: {e}")),
        }
    }

    fn transmit(&mut self, t: u64, frame: &Frame) {
        self.log.push(t, "tx", describe_frame(frame));
        let bytes = match encode_frame(frame) {
            Ok(b) => b,
            Err(e) => {
                self.log.push(t, "tx", format!("encode failed: {e}"));
                return;
            }
        };
        let deliveries = self.channel.transmit(&bytes);
        let outcome = match deliveries.as_slice() {
            [] => "dropped".to_string(),
            [one] if *one == bytes => "delivered".to_string(),
            [_] => "delivered corrupted".to_string(),
            many => format!("delivered x{}", many.len()),
        };
        self.log.push(t, "chan", format!("seq={} {outcome}", frame.seq));
        for datagram in deliveries {
            let before = self.rx.stats();
            let effects = self.rx.rx_bytes(&datagram, t);
            let after = self.rx.stats();
            if after.rejected > before.rejected {
                self.log.push(t, "rx", "rejected undecodable frame");
            } else if after.duplicates > before.duplicates {
                self.log.push(t, "rx", format!("duplicate seq={} ignored", frame.seq));
            }
            self.execute(effects);
        }
    }
}

fn channel_config(scenario: &Scenario, seed: u64) -> ChannelConfig {
    let mut cfg = scenario.channel().unwrap_or_default();
    cfg.seed ^= seed;
    cfg
}

/// Execute a scenario on a 1 ms virtual clock.
///
/// Accelerometer samples are produced at the classifier's sample rate: from
/// the active tilt directive while it lasts, otherwise flat. The channel
/// generator is seeded with the scenario's channel seed XOR `seed`.
pub fn run(scenario: &Scenario, cfg: &SimConfig, seed: u64) -> RunReport {
    let outbox_buf = SharedBuffer::default();
    let telemetry_buf = SharedBuffer::default();
    let channel_cfg = channel_config(scenario, seed);
    let mut sim = Sim {
        tx: Transmitter::new(cfg.transmitter.clone(), cfg.classifier),
        channel: Channel::new(channel_cfg).unwrap_or_else(|_| {
            Channel::new(ChannelConfig::identity(channel_cfg.seed)).expect("identity channel is valid")
        }),
        rx: Receiver::new(cfg.receiver.clone()),
        modem: Modem::with_log(outbox_buf.clone()),
        store: Store::with_log(telemetry_buf.clone()),
        log: EventLog::default(),
        lcd_history: vec![(0, crate::receiver::lcd_row(IDLE_TEXT))],
        caregiver_sms: Vec::new(),
        broadcasts: Vec::new(),
    };
    sim.log.push(
        0,
        "scenario",
        format!(
            "start seed={seed} channel drop={} bitflip={} dup={} seed={}",
            channel_cfg.drop_p, channel_cfg.bitflip_p, channel_cfg.dup_p, channel_cfg.seed
        ),
    );

    let horizon = scenario.horizon() + TAIL_MS;
    let period = cfg.classifier.sample_period_ms();
    let mut next_sample = 0.0f64;
    let mut tilt: Option<(f64, f64, u64)> = None;
    let mut vitals: Option<VitalsReading> = None;
    let mut pending = scenario.directives.iter().peekable();

    for t in 0..=horizon {
        while let Some(d) = pending.next_if(|d| d.t_ms == t) {
            match &d.directive {
                Directive::Tilt { pitch_deg, roll_deg, hold_ms } => {
                    sim.log.push(t, "scenario", format!("tilt pitch={pitch_deg} roll={roll_deg} hold={hold_ms}ms"));
                    tilt = Some((*pitch_deg, *roll_deg, t + hold_ms));
                }
                Directive::Vitals { bpm, temp_c } => {
                    sim.log.push(t, "scenario", format!("vitals bpm={bpm} temp={temp_c}"));
                    vitals = Some(VitalsReading { bpm: *bpm, temp_c: *temp_c, t_ms: t });
                }
                Directive::Ack => {
                    sim.log.push(t, "scenario", "caregiver acknowledges");
                    let effects = sim.rx.acknowledge(t);
                    sim.execute(effects);
                }
                Directive::Channel(_) | Directive::ExpectLcd { .. } | Directive::ExpectSms { .. }
                | Directive::ExpectAlert { .. } | Directive::ExpectNoSms { .. } => {}
            }
        }

        let sample = if t as f64 >= next_sample {
            next_sample += period;
            let (pitch, roll) = match tilt {
                Some((p, r, end)) if t < end => (p, r),
                _ => (0.0, 0.0),
            };
            Some(AccelSample::from_tilt(pitch, roll, t))
        } else {
            None
        };
        let frames = sim.tx.step(t, sample.as_ref(), vitals.as_ref());
        for event in sim.tx.last_events().to_vec() {
            sim.log.push(
                t,
                "tx",
                format!("gesture {:?} onset={} escalate={}", event.class, event.onset_ms, event.escalate),
            );
        }
        for frame in &frames {
            sim.transmit(t, frame);
        }
        let effects = sim.rx.tick(t);
        if !effects.is_empty() {
            sim.log.push(t, "rx", "attendance timeout");
        }
        sim.execute(effects);
    }

    let expectations = evaluate(scenario, &sim);
    for e in &expectations {
        sim.log.push(
            horizon,
            "expect",
            format!("line {} {} {}", e.line, if e.passed { "PASS" } else { "FAIL" }, e.description),
        );
    }

    RunReport {
        log: sim.log,
        expectations,
        lcd: sim.rx.lcd().clone(),
        lcd_history: sim.lcd_history,
        caregiver_sms: sim.caregiver_sms,
        broadcasts: sim.broadcasts,
        outbox: sim.modem.outbox().to_vec(),
        outbox_log: outbox_buf.contents(),
        store: sim.store,
        telemetry_log: telemetry_buf.contents(),
        channel: sim.channel.stats(),
    }
}

fn evaluate(scenario: &Scenario, sim: &Sim) -> Vec<ExpectationResult> {
    let in_window = |t: u64, from: u64, to: u64| t >= from && t <= to;
    scenario
        .directives
        .iter()
        .filter(|d| d.directive.is_expectation())
        .map(|d| {
            let from = d.t_ms;
            let (description, passed) = match &d.directive {
                Directive::ExpectLcd { text, by_ms } => {
                    // Row 0 as it stood at `from`, plus every change up to `by_ms`.
                    let at_start = sim.lcd_history.iter().rev().find(|(t, _)| *t <= from);
                    let later = sim.lcd_history.iter().filter(|(t, _)| *t > from && *t <= *by_ms);
                    let passed = at_start.into_iter().chain(later).any(|(_, row)| row.trim_end() == text);
                    (format!("lcd shows \"{text}\" in [{from}, {by_ms}]"), passed)
                }
                Directive::ExpectSms { substring, by_ms } => (
                    format!("caregiver sms containing \"{substring}\" in [{from}, {by_ms}]"),
                    sim.caregiver_sms.iter().any(|(t, b)| in_window(*t, from, *by_ms) && b.contains(substring.as_str())),
                ),
                Directive::ExpectAlert { substring, by_ms } => (
                    format!("alert containing \"{substring}\" in [{from}, {by_ms}]"),
                    sim.broadcasts.iter().any(|(t, b, _)| in_window(*t, from, *by_ms) && b.contains(substring.as_str())),
                ),
                Directive::ExpectNoSms { until_ms } => (
                    format!("no caregiver sms in [{from}, {until_ms}]"),
                    !sim.caregiver_sms.iter().any(|(t, _)| in_window(*t, from, *until_ms)),
                ),
                _ => unreachable!("filtered to expectations"),
            };
            ExpectationResult { line: d.line, t_ms: d.t_ms, description, passed }
        })
        .collect()
}
