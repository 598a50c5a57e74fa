//! RF link: frame codec, CRC and the seeded lossy channel.

pub mod channel;
pub mod crc;
pub mod frame;

pub use channel::{Channel, ChannelConfig, ChannelConfigError, ChannelStats};
pub use crc::crc16;
pub use frame::{
    decode_frame, encode_frame, Frame, FrameError, FrameKind, MessageCode, VitalsPayload,
    FLAG_ESCALATE, MAX_PAYLOAD, PROTOCOL_VERSION,
};
