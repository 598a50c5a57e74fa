//! Patient-side firmware loop.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gesture::{AccelSample, ClassifierConfig, GestureClass, GestureDetector, GestureEvent};
use crate::vitals::VitalsReading;
use crate::wire::{Frame, MessageCode, VitalsPayload};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TxError {
    #[error("no message mapped to gesture {0:?}")]
    UnmappedGesture(GestureClass),
    #[error("neutral posture carries no message")]
    NeutralGesture,
    #[error("gestures {0:?} and {1:?} map to the same message")]
    DuplicateMapping(GestureClass, GestureClass),
    #[error("invalid transmitter config: {0}")]
    InvalidConfig(String),
}

/// Gesture to message assignment. Each message may be bound to at most one
/// gesture; a gesture left out sends nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GestureMapping(BTreeMap<GestureClass, MessageCode>);

impl Default for GestureMapping {
    fn default() -> Self {
        Self(BTreeMap::from([
            (GestureClass::Forward, MessageCode::Emergency),
            (GestureClass::Backward, MessageCode::WashRoom),
            (GestureClass::Left, MessageCode::NeedWater),
            (GestureClass::Right, MessageCode::NeedFood),
        ]))
    }
}

impl GestureMapping {
    pub fn new(entries: impl IntoIterator<Item = (GestureClass, MessageCode)>) -> Result<Self, TxError> {
        let mapping = Self(entries.into_iter().collect());
        mapping.validate()?;
        Ok(mapping)
    }

    pub fn validate(&self) -> Result<(), TxError> {
        if self.0.contains_key(&GestureClass::Neutral) {
            return Err(TxError::NeutralGesture);
        }
        let mut seen: BTreeMap<MessageCode, GestureClass> = BTreeMap::new();
        for (&class, &code) in &self.0 {
            if let Some(&other) = seen.get(&code) {
                return Err(TxError::DuplicateMapping(other, class));
            }
            seen.insert(code, class);
        }
        Ok(())
    }

    pub fn get(&self, class: GestureClass) -> Option<MessageCode> {
        self.0.get(&class).copied()
    }
}

pub fn gesture_to_message(class: GestureClass, mapping: &GestureMapping) -> Result<MessageCode, TxError> {
    if class == GestureClass::Neutral {
        return Err(TxError::NeutralGesture);
    }
    mapping.get(class).ok_or(TxError::UnmappedGesture(class))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransmitterConfig {
    pub device_id: u16,
    pub room_no: u8,
    pub vitals_period_ms: u64,
    pub message_repeat: u32,
    pub repeat_spacing_ms: u64,
    pub mapping: GestureMapping,
}

impl Default for TransmitterConfig {
    fn default() -> Self {
        Self {
            device_id: 0x0001,
            room_no: 7,
            vitals_period_ms: 1000,
            message_repeat: 3,
            repeat_spacing_ms: 50,
            mapping: GestureMapping::default(),
        }
    }
}

impl TransmitterConfig {
    pub fn validate(&self) -> Result<(), TxError> {
        if self.vitals_period_ms == 0 {
            return Err(TxError::InvalidConfig("vitals_period_ms must be > 0".into()));
        }
        if self.message_repeat == 0 {
            return Err(TxError::InvalidConfig("message_repeat must be >= 1".into()));
        }
        self.mapping.validate()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxStats {
    pub gestures: u64,
    pub unmapped: u64,
    pub logical_frames: u64,
    pub transmissions: u64,
}

/// Patient unit state, advanced by [`Transmitter::step`] on the virtual clock.
#[derive(Debug, Clone)]
pub struct Transmitter {
    cfg: TransmitterConfig,
    detector: GestureDetector,
    seq: u8,
    next_vitals_ms: u64,
    /// `(due_ms, frame)`, ordered by due time.
    repeats: VecDeque<(u64, Frame)>,
    last_events: Vec<GestureEvent>,
    stats: TxStats,
}

impl Transmitter {
    pub fn new(cfg: TransmitterConfig, classifier: ClassifierConfig) -> Self {
        Self::with_initial_seq(cfg, classifier, 0)
    }

    pub fn with_initial_seq(cfg: TransmitterConfig, classifier: ClassifierConfig, seq: u8) -> Self {
        Self {
            cfg,
            detector: GestureDetector::new(classifier),
            seq,
            next_vitals_ms: 0,
            repeats: VecDeque::new(),
            last_events: Vec::new(),
            stats: TxStats::default(),
        }
    }

    pub fn config(&self) -> &TransmitterConfig {
        &self.cfg
    }

    pub fn stats(&self) -> TxStats {
        self.stats
    }

    /// Sequence number the next logical frame will carry.
    pub fn next_seq(&self) -> u8 {
        self.seq
    }

    pub fn current_class(&self) -> GestureClass {
        self.detector.class()
    }

    /// Gesture events recognised during the most recent step.
    pub fn last_events(&self) -> &[GestureEvent] {
        &self.last_events
    }

    /// Frames due to go on air at `now_ms`. A gesture queues its message
    /// `message_repeat` times, `repeat_spacing_ms` apart, all copies sharing
    /// one sequence number; the first copy leaves in the same step.
    pub fn step(
        &mut self,
        now_ms: u64,
        accel: Option<&AccelSample>,
        vitals: Option<&VitalsReading>,
    ) -> Vec<Frame> {
        self.last_events.clear();
        if let Some(sample) = accel {
            if let Some(event) = self.detector.push_sample(sample) {
                self.last_events.push(event);
                self.stats.gestures += 1;
                match gesture_to_message(event.class, &self.cfg.mapping) {
                    Ok(code) => {
                        let frame = Frame::message(
                            self.cfg.device_id,
                            self.cfg.room_no,
                            self.take_seq(),
                            code,
                            event.escalate,
                        );
                        for i in 0..u64::from(self.cfg.message_repeat) {
                            self.enqueue(now_ms + i * self.cfg.repeat_spacing_ms, frame.clone());
                        }
                    }
                    Err(_) => self.stats.unmapped += 1,
                }
            }
        }

        let mut out = Vec::new();
        if let Some(reading) = vitals {
            if now_ms >= self.next_vitals_ms {
                let payload = VitalsPayload::from_values(reading.bpm, reading.temp_c);
                out.push(Frame::vitals(self.cfg.device_id, self.cfg.room_no, self.take_seq(), payload));
                self.next_vitals_ms += self.cfg.vitals_period_ms;
                // Slots missed while no reading was available are skipped, not replayed.
                if self.next_vitals_ms <= now_ms {
                    let behind = (now_ms - self.next_vitals_ms) / self.cfg.vitals_period_ms + 1;
                    self.next_vitals_ms += behind * self.cfg.vitals_period_ms;
                }
            }
        }

        while let Some((due, _)) = self.repeats.front() {
            if *due > now_ms {
                break;
            }
            let (_, frame) = self.repeats.pop_front().expect("front checked");
            out.push(frame);
        }
        self.stats.transmissions += out.len() as u64;
        out
    }

    fn take_seq(&mut self) -> u8 {
        let seq = self.seq;
        self.seq = self.seq.wrapping_add(1);
        self.stats.logical_frames += 1;
        seq
    }

    fn enqueue(&mut self, due: u64, frame: Frame) {
        let pos = self.repeats.partition_point(|(d, _)| *d <= due);
        self.repeats.insert(pos, (due, frame));
    }
}
