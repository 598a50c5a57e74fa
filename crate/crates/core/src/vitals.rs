//! Photoplethysmogram fixtures, heart-rate estimation and anomaly bands.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;

pub const MIN_WINDOW_MS: f64 = 3000.0;
pub const DEFAULT_MIN_PEAK_DISTANCE_MS: f64 = 250.0;

/// Pulse half-width as a fraction of the beat period.
const PULSE_HALF_WIDTH: f64 = 0.3;
const BASELINE: f64 = 0.1;
const PULSE_AMPLITUDE: f64 = 0.8;
/// Centered moving-average length applied before peak picking.
const SMOOTHING_TAPS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VitalsError {
    #[error("sampling rate {rate_hz} Hz is below 4 samples per beat at {bpm} BPM")]
    InvalidRate { bpm: f64, rate_hz: f64 },
    #[error("heart rate {0} BPM outside the synthesizable range [30, 220]")]
    InvalidBpm(f64),
    #[error("window spans {0:.0} ms, at least 3000 ms required")]
    WindowTooShort(f64),
    #[error("fewer than two peaks accepted")]
    InsufficientData,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpgSample {
    pub value: f64,
    pub t_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VitalsReading {
    pub bpm: f64,
    pub temp_c: f64,
    pub t_ms: u64,
}

impl VitalsReading {
    /// True when both values sit inside their plausible physiological range.
    pub fn is_valid(&self) -> bool {
        self.bpm > 20.0 && self.bpm < 250.0 && self.temp_c > 30.0 && self.temp_c < 45.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnomalyBand {
    pub bpm_lo: f64,
    pub bpm_hi: f64,
    pub temp_hi_c: f64,
}

impl Default for AnomalyBand {
    fn default() -> Self {
        Self { bpm_lo: 50.0, bpm_hi: 120.0, temp_hi_c: 38.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnomalyKind {
    BpmLow,
    BpmHigh,
    TempHigh,
}

/// Synthetic PPG: one raised-cosine pulse per beat, centered mid-period,
/// plus seeded uniform noise in `[-noise_amp, +noise_amp]`.
pub fn synth_ppg(
    bpm: f64,
    duration_ms: f64,
    rate_hz: f64,
    noise_amp: f64,
    seed: u64,
) -> Result<Vec<PpgSample>, VitalsError> {
    if !(30.0..=220.0).contains(&bpm) {
        return Err(VitalsError::InvalidBpm(bpm));
    }
    if !(rate_hz >= 4.0 * bpm / 60.0) {
        return Err(VitalsError::InvalidRate { bpm, rate_hz });
    }
    let period = 60_000.0 / bpm;
    let half_width = PULSE_HALF_WIDTH * period;
    let step = 1000.0 / rate_hz;
    let count = (duration_ms.max(0.0) / step).floor() as usize;
    let mut rng = SplitMix64::new(seed);

    Ok((0..count)
        .map(|i| {
            let t_ms = i as f64 * step;
            let x = t_ms.rem_euclid(period) - period / 2.0;
            let pulse = if x.abs() < half_width {
                0.5 * (1.0 + (std::f64::consts::PI * x / half_width).cos())
            } else {
                0.0
            };
            let noise = noise_amp * (2.0 * rng.next_f64() - 1.0);
            PpgSample {
                value: (BASELINE + PULSE_AMPLITUDE * pulse + noise).clamp(0.0, 1.0),
                t_ms,
            }
        })
        .collect())
}

fn smooth(values: &[f64]) -> Vec<f64> {
    let half = SMOOTHING_TAPS / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Peak times (ms) accepted by the detector.
///
/// Candidates are local maxima of the lightly smoothed window that exceed
/// `mean + 0.5·stddev`. Within `min_peak_distance_ms` of the previous accepted
/// peak only the taller one survives. Peak times are refined to sub-sample
/// precision with a three-point parabola.
pub fn detect_peaks(window: &[PpgSample], min_peak_distance_ms: f64) -> Vec<f64> {
    if window.len() < 3 {
        return Vec::new();
    }
    let raw: Vec<f64> = window.iter().map(|s| s.value).collect();
    let s = smooth(&raw);
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let threshold = mean + 0.5 * var.sqrt();

    // (time, height)
    let mut accepted: Vec<(f64, f64)> = Vec::new();
    for i in 1..s.len() - 1 {
        if !(s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] > threshold) {
            continue;
        }
        let (a, b, c) = (s[i - 1], s[i], s[i + 1]);
        let denom = a - 2.0 * b + c;
        let offset = if denom < 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
        let t = window[i].t_ms + offset * (window[i + 1].t_ms - window[i - 1].t_ms) / 2.0;

        match accepted.last_mut() {
            Some(last) if t - last.0 < min_peak_distance_ms => {
                if b > last.1 {
                    *last = (t, b);
                }
            }
            _ => accepted.push((t, b)),
        }
    }
    accepted.into_iter().map(|(t, _)| t).collect()
}

/// Heart rate from the median inter-peak interval.
pub fn estimate_bpm(window: &[PpgSample], min_peak_distance_ms: f64) -> Result<f64, VitalsError> {
    let span = match (window.first(), window.last()) {
        (Some(first), Some(last)) => last.t_ms - first.t_ms,
        _ => 0.0,
    };
    if span < MIN_WINDOW_MS {
        return Err(VitalsError::WindowTooShort(span));
    }
    let peaks = detect_peaks(window, min_peak_distance_ms);
    if peaks.len() < 2 {
        return Err(VitalsError::InsufficientData);
    }
    let mut intervals: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    intervals.sort_by(f64::total_cmp);
    let mid = intervals.len() / 2;
    let median = if intervals.len().is_multiple_of(2) {
        (intervals[mid - 1] + intervals[mid]) / 2.0
    } else {
        intervals[mid]
    };
    Ok(60_000.0 / median)
}

/// Heart-rate anomalies take precedence over temperature.
pub fn check_anomaly(reading: &VitalsReading, band: &AnomalyBand) -> Option<AnomalyKind> {
    if reading.bpm < band.bpm_lo {
        Some(AnomalyKind::BpmLow)
    } else if reading.bpm > band.bpm_hi {
        Some(AnomalyKind::BpmHigh)
    } else if reading.temp_c > band.temp_hi_c {
        Some(AnomalyKind::TempHigh)
    } else {
        None
    }
}
