//! Accelerometer tilt, hysteresis classification and dwell-qualified
//! gesture detection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Magnitude below which no gravity direction can be trusted.
pub const MIN_GRAVITY_G: f64 = 0.2;
/// Simulated sensor full-scale range.
pub const MAX_MAGNITUDE_G: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GestureError {
    #[error("acceleration magnitude {0:.3} g is too small to infer tilt")]
    IndeterminateTilt(f64),
    #[error("acceleration sample out of range: {0}")]
    InvalidSample(String),
    #[error("invalid classifier config: {0}")]
    InvalidConfig(String),
}

/// One accelerometer reading in units of standard gravity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelSample {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub t_ms: u64,
}

impl AccelSample {
    pub fn new(ax: f64, ay: f64, az: f64, t_ms: u64) -> Result<Self, GestureError> {
        let sample = Self { ax, ay, az, t_ms };
        if !(ax.is_finite() && ay.is_finite() && az.is_finite()) {
            return Err(GestureError::InvalidSample("non-finite component".into()));
        }
        if sample.magnitude() > MAX_MAGNITUDE_G {
            return Err(GestureError::InvalidSample(format!(
                "magnitude {:.3} g exceeds {MAX_MAGNITUDE_G} g",
                sample.magnitude()
            )));
        }
        Ok(sample)
    }

    /// Unit gravity vector for a device held at the given pitch and roll.
    ///
    /// Inverse of [`tilt_from_accel`] whenever `sin²(pitch) + sin²(roll) ≤ 1`;
    /// outside that region the horizontal components are rescaled onto the
    /// unit sphere, which keeps the dominant axis and its sign.
    pub fn from_tilt(pitch_deg: f64, roll_deg: f64, t_ms: u64) -> Self {
        let mut ax = pitch_deg.to_radians().sin();
        let mut ay = roll_deg.to_radians().sin();
        let horizontal = ax * ax + ay * ay;
        let az = if horizontal <= 1.0 {
            (1.0 - horizontal).sqrt()
        } else {
            let n = horizontal.sqrt();
            ax /= n;
            ay /= n;
            0.0
        };
        Self { ax, ay, az, t_ms }
    }

    pub fn magnitude(&self) -> f64 {
        (self.ax * self.ax + self.ay * self.ay + self.az * self.az).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltAngles {
    pub pitch_deg: f64,
    pub roll_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GestureClass {
    Neutral,
    Forward,
    Backward,
    Left,
    Right,
}

impl GestureClass {
    pub const DIRECTIONS: [GestureClass; 4] = [
        GestureClass::Forward,
        GestureClass::Backward,
        GestureClass::Left,
        GestureClass::Right,
    ];

    /// The signed angle that holds this class, oriented so that a larger
    /// value means "more tilted in this direction".
    fn driving_angle(self, tilt: &TiltAngles) -> Option<f64> {
        match self {
            GestureClass::Neutral => None,
            GestureClass::Forward => Some(tilt.pitch_deg),
            GestureClass::Backward => Some(-tilt.pitch_deg),
            GestureClass::Left => Some(-tilt.roll_deg),
            GestureClass::Right => Some(tilt.roll_deg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GestureEvent {
    pub class: GestureClass,
    pub onset_ms: u64,
    pub escalate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub threshold_deg: f64,
    pub hysteresis_deg: f64,
    pub dwell_ms: u64,
    pub escalate_ms: u64,
    pub sample_rate_hz: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            threshold_deg: 30.0,
            hysteresis_deg: 5.0,
            dwell_ms: 500,
            escalate_ms: 3000,
            sample_rate_hz: 50.0,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), GestureError> {
        if !(self.hysteresis_deg > 0.0 && self.threshold_deg > self.hysteresis_deg) {
            return Err(GestureError::InvalidConfig(
                "require threshold_deg > hysteresis_deg > 0".into(),
            ));
        }
        if !(self.dwell_ms > 0 && self.escalate_ms > self.dwell_ms) {
            return Err(GestureError::InvalidConfig(
                "require escalate_ms > dwell_ms > 0".into(),
            ));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(GestureError::InvalidConfig("require sample_rate_hz > 0".into()));
        }
        Ok(())
    }

    pub fn sample_period_ms(&self) -> f64 {
        1000.0 / self.sample_rate_hz
    }
}

/// Gravity-referenced pitch and roll.
///
/// `pitch = atan2(ax, √(ay²+az²))`, `roll = atan2(ay, √(ax²+az²))`, both in
/// degrees and both confined to `[-90, 90]` because the second argument is
/// never negative.
pub fn tilt_from_accel(sample: &AccelSample) -> Result<TiltAngles, GestureError> {
    let AccelSample { ax, ay, az, .. } = *sample;
    let magnitude = sample.magnitude();
    // NaN magnitudes fail this comparison too.
    if !(magnitude >= MIN_GRAVITY_G) {
        return Err(GestureError::IndeterminateTilt(magnitude));
    }
    let pitch = ax.atan2((ay * ay + az * az).sqrt());
    let roll = ay.atan2((ax * ax + az * az).sqrt());
    Ok(TiltAngles {
        pitch_deg: pitch.to_degrees(),
        roll_deg: roll.to_degrees(),
    })
}

/// Threshold classification with hysteresis.
///
/// A held direction survives while its driving angle stays at or above
/// `threshold - hysteresis`. Otherwise the tilt is classified afresh: an axis
/// counts only when it strictly exceeds the threshold, the larger absolute
/// angle wins, and pitch wins exact ties.
pub fn classify(tilt: &TiltAngles, cfg: &ClassifierConfig, prev: GestureClass) -> GestureClass {
    if let Some(angle) = prev.driving_angle(tilt) {
        if angle >= cfg.threshold_deg - cfg.hysteresis_deg {
            return prev;
        }
    }

    let pitch = tilt.pitch_deg.abs();
    let roll = tilt.roll_deg.abs();
    let pitch_over = pitch > cfg.threshold_deg;
    let roll_over = roll > cfg.threshold_deg;

    let pitch_class = || {
        if tilt.pitch_deg > 0.0 {
            GestureClass::Forward
        } else {
            GestureClass::Backward
        }
    };
    let roll_class = || {
        if tilt.roll_deg > 0.0 {
            GestureClass::Right
        } else {
            GestureClass::Left
        }
    };

    match (pitch_over, roll_over) {
        (true, true) if roll > pitch => roll_class(),
        (true, _) => pitch_class(),
        (false, true) => roll_class(),
        (false, false) => GestureClass::Neutral,
    }
}

/// Dwell and escalation timer over a classified sample stream.
///
/// Each sample stands for one sample period, so a hold of `n` samples lasts
/// `n × period` milliseconds: 25 samples at 50 Hz satisfy a 500 ms dwell.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureDetector {
    cfg: ClassifierConfig,
    class: GestureClass,
    onset_ms: u64,
    dwell_fired: bool,
    escalate_fired: bool,
}

impl GestureDetector {
    pub fn new(cfg: ClassifierConfig) -> Self {
        Self {
            cfg,
            class: GestureClass::Neutral,
            onset_ms: 0,
            dwell_fired: false,
            escalate_fired: false,
        }
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.cfg
    }

    /// Class currently being held.
    pub fn class(&self) -> GestureClass {
        self.class
    }

    /// Classify a raw sample and feed it. A sample with no usable gravity
    /// reference counts as Neutral and resets the hold.
    pub fn push_sample(&mut self, sample: &AccelSample) -> Option<GestureEvent> {
        let class = match tilt_from_accel(sample) {
            Ok(tilt) => classify(&tilt, &self.cfg, self.class),
            Err(_) => GestureClass::Neutral,
        };
        self.push(sample.t_ms, class)
    }

    /// Feed one already-classified sample; returns at most one event.
    pub fn push(&mut self, t_ms: u64, class: GestureClass) -> Option<GestureEvent> {
        if class != self.class {
            self.class = class;
            self.onset_ms = t_ms;
            self.dwell_fired = false;
            self.escalate_fired = false;
        }
        if class == GestureClass::Neutral {
            return None;
        }

        let held_ms = t_ms.saturating_sub(self.onset_ms) as f64 + self.cfg.sample_period_ms();
        if !self.dwell_fired && held_ms >= self.cfg.dwell_ms as f64 {
            self.dwell_fired = true;
            return Some(GestureEvent {
                class,
                onset_ms: self.onset_ms,
                escalate: false,
            });
        }
        if self.dwell_fired && !self.escalate_fired && held_ms >= self.cfg.escalate_ms as f64 {
            self.escalate_fired = true;
            return Some(GestureEvent {
                class,
                onset_ms: self.onset_ms,
                escalate: true,
            });
        }
        None
    }
}

/// Run a detector over a whole classified stream.
pub fn detect_gestures(
    stream: impl IntoIterator<Item = (u64, GestureClass)>,
    cfg: &ClassifierConfig,
) -> Vec<GestureEvent> {
    let mut detector = GestureDetector::new(*cfg);
    stream
        .into_iter()
        .filter_map(|(t, class)| detector.push(t, class))
        .collect()
}
