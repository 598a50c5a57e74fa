//! WebAssembly bindings for the single-page demo in `www/`.
//!
//! Every export returns a JSON string; the page parses it and draws. The
//! `*_json` functions hold the logic so they can be tested natively.

use paracom_core::gesture::{tilt_from_accel, AccelSample, ClassifierConfig, GestureClass, GestureDetector};
use paracom_core::scenario::{self, parse_scenario, SimConfig};
use paracom_core::transmitter::GestureMapping;
use paracom_core::vitals::{detect_peaks, estimate_bpm, synth_ppg, DEFAULT_MIN_PEAK_DISTANCE_MS};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn class_name(class: GestureClass) -> &'static str {
    match class {
        GestureClass::Neutral => "Neutral",
        GestureClass::Forward => "Forward",
        GestureClass::Backward => "Backward",
        GestureClass::Left => "Left",
        GestureClass::Right => "Right",
    }
}

/// A patient unit's classifier fed from on-screen sliders at its native
/// sample rate.
#[wasm_bindgen]
pub struct TiltPad {
    detector: GestureDetector,
    mapping: GestureMapping,
    t_ms: f64,
}

impl Default for TiltPad {
    fn default() -> Self {
        Self::new()
    }
}

#[wasm_bindgen]
impl TiltPad {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Self {
        Self {
            detector: GestureDetector::new(ClassifierConfig::default()),
            mapping: GestureMapping::default(),
            t_ms: 0.0,
        }
    }

    #[wasm_bindgen(getter)]
    pub fn period_ms(&self) -> f64 {
        self.detector.config().sample_period_ms()
    }

    /// Feed one sample and advance the clock by one period.
    pub fn sample(&mut self, pitch_deg: f64, roll_deg: f64) -> String {
        self.sample_json(pitch_deg, roll_deg).to_string()
    }
}

impl TiltPad {
    pub fn sample_json(&mut self, pitch_deg: f64, roll_deg: f64) -> Value {
        let s = AccelSample::from_tilt(pitch_deg, roll_deg, self.t_ms as u64);
        let tilt = tilt_from_accel(&s).ok();
        let event = self.detector.push_sample(&s);
        self.t_ms += self.period_ms();
        let class = self.detector.class();
        json!({
            "t_ms": s.t_ms,
            "accel": [s.ax, s.ay, s.az],
            "pitch_deg": tilt.map(|t| t.pitch_deg),
            "roll_deg": tilt.map(|t| t.roll_deg),
            "class": class_name(class),
            "message": self.mapping.get(class).map(|m| m.text()),
            "event": event.map(|e| json!({
                "class": class_name(e.class),
                "onset_ms": e.onset_ms,
                "escalate": e.escalate,
                "message": self.mapping.get(e.class).map(|m| m.text()),
            })),
        })
    }
}

pub fn ppg_json(bpm: f64, noise_amp: f64, seed: u64) -> Value {
    let window = match synth_ppg(bpm, 10_000.0, 100.0, noise_amp, seed) {
        Ok(w) => w,
        Err(e) => return json!({ "error": e.to_string() }),
    };
    let peaks = detect_peaks(&window, DEFAULT_MIN_PEAK_DISTANCE_MS);
    let estimate = estimate_bpm(&window, DEFAULT_MIN_PEAK_DISTANCE_MS);
    json!({
        "t_ms": window.iter().map(|s| s.t_ms).collect::<Vec<_>>(),
        "value": window.iter().map(|s| s.value).collect::<Vec<_>>(),
        "peaks_ms": peaks,
        "bpm": estimate.as_ref().ok(),
        "error": estimate.err().map(|e| e.to_string()),
    })
}

/// Synthesize a 10 s PPG window at 100 Hz and estimate its rate.
#[wasm_bindgen]
pub fn ppg(bpm: f64, noise_amp: f64, seed: u32) -> String {
    ppg_json(bpm, noise_amp, u64::from(seed)).to_string()
}

pub fn scenario_json(text: &str, seed: u64) -> Value {
    let parsed = match parse_scenario(text) {
        Ok(s) => s,
        Err(e) => return json!({ "error": { "line": e.line, "reason": e.reason } }),
    };
    let report = scenario::run(&parsed, &SimConfig::default(), seed);
    json!({
        "passed": report.passed(),
        "log": report.log.to_text(),
        "lcd": report.lcd,
        "lcd_history": report.lcd_history,
        "outbox": report.outbox.iter().map(|r| json!({ "t_ms": r.t_ms, "to": r.to, "body": r.body })).collect::<Vec<_>>(),
        "expectations": report.expectations.iter().map(|e| json!({
            "line": e.line, "description": e.description, "passed": e.passed,
        })).collect::<Vec<_>>(),
        "channel": {
            "sent": report.channel.sent,
            "dropped": report.channel.dropped,
            "corrupted": report.channel.corrupted,
            "duplicated": report.channel.duplicated,
        },
    })
}

/// Run a scenario script with default settings.
#[wasm_bindgen]
pub fn run_scenario(text: &str, seed: u32) -> String {
    scenario_json(text, u64::from(seed)).to_string()
}

#[wasm_bindgen]
pub fn demo_scenario() -> String {
    scenario::DEMO.to_string()
}
