use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vitals::AnomalyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Vitals,
    Message,
    Alert,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("field `{field}`: {reason}")]
pub struct ValidationError {
    pub field: &'static str,
    pub reason: &'static str,
}

/// One persisted observation. `id` is assigned by the store on ingest; any
/// value supplied by the client is ignored.
///
/// Field presence follows `kind`:
///
/// | kind    | required              | forbidden                         |
/// |---------|-----------------------|-----------------------------------|
/// | vitals  | bpm, temp_c           | message_text, anomaly             |
/// | message | message_text          | bpm, temp_c, anomaly              |
/// | alert   | anomaly, message_text | bpm, temp_c                       |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelemetryRecord {
    #[serde(default)]
    pub id: u64,
    pub device_id: u16,
    pub room_no: u8,
    pub t_ms: u64,
    pub kind: RecordKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bpm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temp_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly: Option<AnomalyKind>,
}

impl TelemetryRecord {
    fn base(device_id: u16, room_no: u8, t_ms: u64, kind: RecordKind) -> Self {
        Self {
            id: 0,
            device_id,
            room_no,
            t_ms,
            kind,
            bpm: None,
            temp_c: None,
            message_text: None,
            anomaly: None,
        }
    }

    pub fn vitals(device_id: u16, room_no: u8, t_ms: u64, bpm: f64, temp_c: f64) -> Self {
        Self {
            bpm: Some(bpm),
            temp_c: Some(temp_c),
            ..Self::base(device_id, room_no, t_ms, RecordKind::Vitals)
        }
    }

    pub fn message(device_id: u16, room_no: u8, t_ms: u64, text: impl Into<String>) -> Self {
        Self {
            message_text: Some(text.into()),
            ..Self::base(device_id, room_no, t_ms, RecordKind::Message)
        }
    }

    pub fn alert(device_id: u16, room_no: u8, t_ms: u64, anomaly: AnomalyKind, body: impl Into<String>) -> Self {
        Self {
            anomaly: Some(anomaly),
            message_text: Some(body.into()),
            ..Self::base(device_id, room_no, t_ms, RecordKind::Alert)
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let rule = |field: &'static str, present: bool, wanted: bool| match (present, wanted) {
            (false, true) => Err(ValidationError { field, reason: "required for this kind" }),
            (true, false) => Err(ValidationError { field, reason: "not allowed for this kind" }),
            _ => Ok(()),
        };
        let (bpm, temp, text, anomaly) = match self.kind {
            RecordKind::Vitals => (true, true, false, false),
            RecordKind::Message => (false, false, true, false),
            RecordKind::Alert => (false, false, true, true),
        };
        rule("bpm", self.bpm.is_some(), bpm)?;
        rule("temp_c", self.temp_c.is_some(), temp)?;
        rule("message_text", self.message_text.is_some(), text)?;
        rule("anomaly", self.anomaly.is_some(), anomaly)?;
        if self.bpm.is_some_and(|v| !v.is_finite()) {
            return Err(ValidationError { field: "bpm", reason: "must be finite" });
        }
        if self.temp_c.is_some_and(|v| !v.is_finite()) {
            return Err(ValidationError { field: "temp_c", reason: "must be finite" });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_validate() {
        assert!(TelemetryRecord::vitals(1, 7, 0, 72.0, 36.8).validate().is_ok());
        assert!(TelemetryRecord::message(1, 7, 0, "EMERGENCY").validate().is_ok());
        assert!(TelemetryRecord::alert(1, 7, 0, AnomalyKind::BpmLow, "ROOM 07: BPM LOW 40.0")
            .validate()
            .is_ok());
    }

    #[test]
    fn missing_and_extra_fields() {
        let mut r = TelemetryRecord::vitals(1, 7, 0, 72.0, 36.8);
        r.bpm = None;
        assert_eq!(r.validate().unwrap_err().field, "bpm");
        let mut r = TelemetryRecord::message(1, 7, 0, "x");
        r.temp_c = Some(1.0);
        assert_eq!(r.validate().unwrap_err().field, "temp_c");
    }

    #[test]
    fn json_shape() {
        let r = TelemetryRecord::vitals(1, 7, 1000, 72.0, 36.8);
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"id":0,"device_id":1,"room_no":7,"t_ms":1000,"kind":"vitals","bpm":72.0,"temp_c":36.8}"#
        );
        let parsed: TelemetryRecord =
            serde_json::from_str(r#"{"device_id":1,"room_no":7,"t_ms":5,"kind":"alert","anomaly":"BpmLow","message_text":"x"}"#)
                .unwrap();
        assert_eq!(parsed.anomaly, Some(AnomalyKind::BpmLow));
        assert_eq!(parsed.id, 0);
    }
}
