use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("channel probability {name}={value} outside [0, 1]")]
pub struct ChannelConfigError {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub drop_p: f64,
    pub bitflip_p: f64,
    pub dup_p: f64,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self::identity(0)
    }
}

impl ChannelConfig {
    pub fn identity(seed: u64) -> Self {
        Self { drop_p: 0.0, bitflip_p: 0.0, dup_p: 0.0, seed }
    }

    pub fn validate(&self) -> Result<(), ChannelConfigError> {
        for (name, value) in [("drop_p", self.drop_p), ("bitflip_p", self.bitflip_p), ("dup_p", self.dup_p)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ChannelConfigError { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub sent: u64,
    pub dropped: u64,
    pub corrupted: u64,
    pub duplicated: u64,
}

/// Seeded lossy link.
///
/// Randomness is consumed in a fixed order per datagram:
/// 1. one draw: dropped if `< drop_p` (nothing else is drawn for a drop);
/// 2. one draw per bit, bytes in order, most significant bit first: the bit
///    flips if `< bitflip_p`;
/// 3. one draw: a second identical copy follows if `< dup_p`.
#[derive(Debug, Clone)]
pub struct Channel {
    cfg: ChannelConfig,
    rng: SplitMix64,
    stats: ChannelStats,
}

impl Channel {
    pub fn new(cfg: ChannelConfig) -> Result<Self, ChannelConfigError> {
        cfg.validate()?;
        Ok(Self { cfg, rng: SplitMix64::new(cfg.seed), stats: ChannelStats::default() })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    pub fn stats(&self) -> ChannelStats {
        self.stats
    }

    pub fn transmit(&mut self, bytes: &[u8]) -> Vec<Vec<u8>> {
        self.stats.sent += 1;
        if self.rng.chance(self.cfg.drop_p) {
            self.stats.dropped += 1;
            return Vec::new();
        }
        let mut copy = bytes.to_vec();
        let mut flipped = false;
        for byte in copy.iter_mut() {
            for bit in (0..8).rev() {
                if self.rng.chance(self.cfg.bitflip_p) {
                    *byte ^= 1 << bit;
                    flipped = true;
                }
            }
        }
        if flipped {
            self.stats.corrupted += 1;
        }
        if self.rng.chance(self.cfg.dup_p) {
            self.stats.duplicated += 1;
            vec![copy.clone(), copy]
        } else {
            vec![copy]
        }
    }
}
