use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gesture::{ClassifierConfig, GestureError};
use crate::receiver::ReceiverConfig;
use crate::transmitter::{TransmitterConfig, TxError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error(transparent)]
    Classifier(#[from] GestureError),
    #[error(transparent)]
    Transmitter(#[from] TxError),
    #[error("receiver: {0}")]
    Receiver(String),
}

/// Every tunable of the simulated system. Any table or key may be omitted
/// from a config file; omitted values keep their defaults.
///
/// ```toml
/// [classifier]
/// threshold_deg = 25.0
///
/// [transmitter]
/// room_no = 12
///
/// [transmitter.mapping]
/// Forward = "ContactPhysician"
/// Backward = "WashRoom"
///
/// [receiver]
/// attend_timeout_ms = 20000
/// caregiver_number = "+15550999"
/// doctors = [{ name = "Dr. Rao", phone = "+15550201" }]
///
/// [receiver.anomaly]
/// bpm_lo = 45.0
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub classifier: ClassifierConfig,
    pub transmitter: TransmitterConfig,
    pub receiver: ReceiverConfig,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.classifier.validate()?;
        self.transmitter.validate()?;
        if self.transmitter.room_no > 99 {
            return Err(ConfigError::Receiver("room_no must be at most 99".into()));
        }
        let band = &self.receiver.anomaly;
        if !(band.bpm_lo < band.bpm_hi) {
            return Err(ConfigError::Receiver("anomaly bpm_lo must be below bpm_hi".into()));
        }
        if self.receiver.dedupe_window == 0 {
            return Err(ConfigError::Receiver("dedupe_window must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::GestureClass;
    use crate::wire::MessageCode;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(SimConfig::from_toml("").unwrap(), SimConfig::default());
    }

    #[test]
    fn overrides_apply() {
        let cfg = SimConfig::from_toml(
            r#"
            [classifier]
            threshold_deg = 25.0
            [transmitter]
            room_no = 12
            [transmitter.mapping]
            Forward = "ContactPhysician"
            [receiver]
            attend_timeout_ms = 20000
            doctors = [{ name = "A", phone = "+1" }]
            [receiver.anomaly]
            bpm_lo = 45.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.classifier.threshold_deg, 25.0);
        assert_eq!(cfg.classifier.dwell_ms, 500);
        assert_eq!(cfg.transmitter.room_no, 12);
        assert_eq!(cfg.transmitter.mapping.get(GestureClass::Forward), Some(MessageCode::ContactPhysician));
        assert_eq!(cfg.transmitter.mapping.get(GestureClass::Left), None);
        assert_eq!(cfg.receiver.attend_timeout_ms, 20_000);
        assert_eq!(cfg.receiver.doctors.len(), 1);
        assert_eq!(cfg.receiver.anomaly.bpm_lo, 45.0);
        assert_eq!(cfg.receiver.anomaly.bpm_hi, 120.0);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(SimConfig::from_toml("[classifier]\nhysteresis_deg = 40.0").is_err());
        assert!(SimConfig::from_toml("[transmitter]\nroom_no = 100").is_err());
        assert!(SimConfig::from_toml("[receiver.anomaly]\nbpm_lo = 200.0").is_err());
        assert!(SimConfig::from_toml("bogus = 1").is_err());
        assert!(SimConfig::from_toml("[transmitter.mapping]\nForward = \"Emergency\"\nLeft = \"Emergency\"").is_err());
    }
}
