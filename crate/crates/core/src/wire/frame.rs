use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::crc::crc16;

pub const SYNC: [u8; 2] = [0xAA, 0x55];
pub const PROTOCOL_VERSION: u8 = 1;
pub const MAX_PAYLOAD: usize = 32;
/// Sync, version, device id, room, seq, kind, flags, payload length.
pub const HEADER_LEN: usize = 10;
pub const CRC_LEN: usize = 2;

pub const FLAG_ESCALATE: u8 = 0x01;
const DEFINED_FLAGS: u8 = FLAG_ESCALATE;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("payload of {0} bytes exceeds {MAX_PAYLOAD}")]
    PayloadTooLong(usize),
    #[error("undefined flag bits set: {0:#04x}")]
    BadFlags(u8),
    #[error("sync bytes missing")]
    BadSync,
    #[error("unsupported protocol version {0}")]
    BadVersion(u8),
    #[error("frame truncated: need {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("payload length field {0} exceeds {MAX_PAYLOAD}")]
    BadLength(u8),
    #[error("crc mismatch: computed {computed:#06x}, received {received:#06x}")]
    BadCrc { computed: u16, received: u16 },
    #[error("{0} unexpected bytes after frame")]
    TrailingBytes(usize),
    #[error("unknown frame kind {0}")]
    BadKind(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum FrameKind {
    Vitals = 0,
    Message = 1,
}

impl TryFrom<u8> for FrameKind {
    type Error = FrameError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            0 => Ok(FrameKind::Vitals),
            1 => Ok(FrameKind::Message),
            other => Err(FrameError::BadKind(other)),
        }
    }
}

/// Pre-coded patient requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum MessageCode {
    Emergency = 0x01,
    WashRoom = 0x02,
    NeedWater = 0x03,
    NeedFood = 0x04,
    ContactPhysician = 0x05,
}

impl MessageCode {
    pub const ALL: [MessageCode; 5] = [
        MessageCode::Emergency,
        MessageCode::WashRoom,
        MessageCode::NeedWater,
        MessageCode::NeedFood,
        MessageCode::ContactPhysician,
    ];

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|c| *c as u8 == b)
    }

    /// Display text, at most 16 characters.
    pub fn text(self) -> &'static str {
        match self {
            MessageCode::Emergency => "EMERGENCY",
            MessageCode::WashRoom => "WASH ROOM",
            MessageCode::NeedWater => "NEED WATER",
            MessageCode::NeedFood => "NEED FOOD",
            MessageCode::ContactPhysician => "CALL DOCTOR",
        }
    }
}

/// Fixed 4-byte vitals encoding: BPM × 10 and °C × 100, both big-endian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VitalsPayload {
    pub bpm_x10: u16,
    pub temp_cx100: u16,
}

impl VitalsPayload {
    pub const LEN: usize = 4;

    pub fn from_values(bpm: f64, temp_c: f64) -> Self {
        let scale = |v: f64, k: f64| (v * k).round().clamp(0.0, u16::MAX as f64) as u16;
        Self { bpm_x10: scale(bpm, 10.0), temp_cx100: scale(temp_c, 100.0) }
    }

    pub fn bpm(&self) -> f64 {
        f64::from(self.bpm_x10) / 10.0
    }

    pub fn temp_c(&self) -> f64 {
        f64::from(self.temp_cx100) / 100.0
    }

    pub fn to_bytes(self) -> [u8; 4] {
        let [b0, b1] = self.bpm_x10.to_be_bytes();
        let [t0, t1] = self.temp_cx100.to_be_bytes();
        [b0, b1, t0, t1]
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        match bytes {
            [b0, b1, t0, t1] => Some(Self {
                bpm_x10: u16::from_be_bytes([*b0, *b1]),
                temp_cx100: u16::from_be_bytes([*t0, *t1]),
            }),
            _ => None,
        }
    }
}

/// One RF frame. The protocol version is implicit: only version 1 exists.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frame {
    pub device_id: u16,
    pub room_no: u8,
    pub seq: u8,
    pub kind: FrameKind,
    pub flags: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn message(device_id: u16, room_no: u8, seq: u8, code: MessageCode, escalate: bool) -> Self {
        Self {
            device_id,
            room_no,
            seq,
            kind: FrameKind::Message,
            flags: if escalate { FLAG_ESCALATE } else { 0 },
            payload: vec![code as u8],
        }
    }

    pub fn vitals(device_id: u16, room_no: u8, seq: u8, vitals: VitalsPayload) -> Self {
        Self {
            device_id,
            room_no,
            seq,
            kind: FrameKind::Vitals,
            flags: 0,
            payload: vitals.to_bytes().to_vec(),
        }
    }

    pub fn escalate(&self) -> bool {
        self.flags & FLAG_ESCALATE != 0
    }

    pub fn message_code(&self) -> Option<MessageCode> {
        match (self.kind, self.payload.as_slice()) {
            (FrameKind::Message, [b]) => MessageCode::from_byte(*b),
            _ => None,
        }
    }

    pub fn vitals_payload(&self) -> Option<VitalsPayload> {
        match self.kind {
            FrameKind::Vitals => VitalsPayload::from_bytes(&self.payload),
            FrameKind::Message => None,
        }
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len() + CRC_LEN
    }
}

/// Serialize a frame:
///
/// ```text
/// AA 55 | ver | dev_hi dev_lo | room | seq | kind | flags | len | payload.. | crc_hi crc_lo
/// ```
///
/// The CRC covers `ver` through the last payload byte.
pub fn encode_frame(frame: &Frame) -> Result<Vec<u8>, FrameError> {
    if frame.payload.len() > MAX_PAYLOAD {
        return Err(FrameError::PayloadTooLong(frame.payload.len()));
    }
    if frame.flags & !DEFINED_FLAGS != 0 {
        return Err(FrameError::BadFlags(frame.flags));
    }
    let mut out = Vec::with_capacity(frame.encoded_len());
    out.extend_from_slice(&SYNC);
    out.push(PROTOCOL_VERSION);
    out.extend_from_slice(&frame.device_id.to_be_bytes());
    out.push(frame.room_no);
    out.push(frame.seq);
    out.push(frame.kind as u8);
    out.push(frame.flags);
    out.push(frame.payload.len() as u8);
    out.extend_from_slice(&frame.payload);
    let crc = crc16(&out[SYNC.len()..]);
    out.extend_from_slice(&crc.to_be_bytes());
    Ok(out)
}

/// Parse one datagram. Checks run in order (sync, version, length, CRC,
/// then field semantics) and the first failure is reported.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, FrameError> {
    let truncated = |needed: usize| FrameError::Truncated { needed, have: bytes.len() };

    if bytes.len() < SYNC.len() {
        return Err(truncated(SYNC.len()));
    }
    if bytes[..2] != SYNC {
        return Err(FrameError::BadSync);
    }
    match bytes.get(2) {
        None => return Err(truncated(3)),
        Some(&PROTOCOL_VERSION) => {}
        Some(&other) => return Err(FrameError::BadVersion(other)),
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(HEADER_LEN));
    }
    let payload_len = bytes[9];
    if usize::from(payload_len) > MAX_PAYLOAD {
        return Err(FrameError::BadLength(payload_len));
    }
    let body_end = HEADER_LEN + usize::from(payload_len);
    let total = body_end + CRC_LEN;
    if bytes.len() < total {
        return Err(truncated(total));
    }
    let computed = crc16(&bytes[SYNC.len()..body_end]);
    let received = u16::from_be_bytes([bytes[body_end], bytes[body_end + 1]]);
    if computed != received {
        return Err(FrameError::BadCrc { computed, received });
    }
    if bytes.len() > total {
        return Err(FrameError::TrailingBytes(bytes.len() - total));
    }
    let kind = FrameKind::try_from(bytes[7])?;
    let flags = bytes[8];
    if flags & !DEFINED_FLAGS != 0 {
        return Err(FrameError::BadFlags(flags));
    }
    Ok(Frame {
        device_id: u16::from_be_bytes([bytes[3], bytes[4]]),
        room_no: bytes[5],
        seq: bytes[6],
        kind,
        flags,
        payload: bytes[HEADER_LEN..body_end].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn emergency() -> Frame {
        Frame::message(0x0001, 7, 0, MessageCode::Emergency, false)
    }

    #[test]
    fn message_frame_layout() {
        let bytes = encode_frame(&emergency()).unwrap();
        assert_eq!(bytes.len(), 13);
        assert_eq!(
            &bytes[..11],
            &[0xAA, 0x55, 0x01, 0x00, 0x01, 0x07, 0x00, 0x01, 0x00, 0x01, 0x01]
        );
        // From the bitwise long-division oracle over bytes 2..11.
        assert_eq!(&bytes[11..], &[0xD6, 0xD5]);
    }

    #[test]
    fn empty_payload_length() {
        let f = Frame {
            device_id: 2,
            room_no: 1,
            seq: 9,
            kind: FrameKind::Vitals,
            flags: 0,
            payload: vec![],
        };
        let bytes = encode_frame(&f).unwrap();
        assert_eq!(bytes.len(), 12);
        assert_eq!(decode_frame(&bytes).unwrap(), f);
        let v = Frame::vitals(2, 1, 9, VitalsPayload::from_values(72.0, 36.8));
        assert_eq!(encode_frame(&v).unwrap().len(), 16);
    }

    #[test]
    fn encode_rejects_long_payload_and_unknown_flags() {
        let mut f = emergency();
        f.payload = vec![0; 33];
        assert_eq!(encode_frame(&f), Err(FrameError::PayloadTooLong(33)));
        let mut f = emergency();
        f.flags = 0x80;
        assert_eq!(encode_frame(&f), Err(FrameError::BadFlags(0x80)));
    }

    #[test]
    fn decode_error_order() {
        let bytes = encode_frame(&emergency()).unwrap();
        assert!(matches!(decode_frame(&bytes[..12]), Err(FrameError::Truncated { .. })));
        assert!(matches!(decode_frame(&[]), Err(FrameError::Truncated { .. })));

        let mut bad = bytes.clone();
        bad[0] = 0x00;
        assert_eq!(decode_frame(&bad), Err(FrameError::BadSync));

        let mut bad = bytes.clone();
        bad[2] = 2;
        assert_eq!(decode_frame(&bad), Err(FrameError::BadVersion(2)));

        let mut bad = bytes.clone();
        bad[9] = 40;
        assert_eq!(decode_frame(&bad), Err(FrameError::BadLength(40)));

        let mut long = bytes.clone();
        long.push(0);
        assert_eq!(decode_frame(&long), Err(FrameError::TrailingBytes(1)));
    }

    #[test]
    fn semantic_checks_follow_crc() {
        let mut raw = encode_frame(&emergency()).unwrap();
        raw[7] = 5;
        let crc = crc16(&raw[2..11]);
        raw[11..].copy_from_slice(&crc.to_be_bytes());
        assert_eq!(decode_frame(&raw), Err(FrameError::BadKind(5)));
    }

    #[test]
    fn single_bit_flips_past_version_are_crc_failures() {
        let f = Frame::message(0xBEEF, 42, 200, MessageCode::NeedFood, true);
        let bytes = encode_frame(&f).unwrap();
        for bit in 0..bytes.len() * 8 {
            let mut c = bytes.clone();
            c[bit / 8] ^= 0x80 >> (bit % 8);
            let err = decode_frame(&c).unwrap_err();
            match bit / 8 {
                0 | 1 => assert_eq!(err, FrameError::BadSync),
                2 => assert!(matches!(err, FrameError::BadVersion(_))),
                // Length field flips may point past the buffer or past the cap.
                9 => assert!(matches!(
                    err,
                    FrameError::BadCrc { .. } | FrameError::Truncated { .. } | FrameError::BadLength(_)
                )),
                _ => assert!(matches!(err, FrameError::BadCrc { .. }), "bit {bit}: {err:?}"),
            }
        }
    }

    #[test]
    fn message_code_table() {
        for code in MessageCode::ALL {
            assert_eq!(MessageCode::from_byte(code as u8), Some(code));
            assert!(code.text().len() <= 16);
        }
        assert_eq!(MessageCode::from_byte(0), None);
        assert_eq!(MessageCode::from_byte(6), None);
    }

    #[test]
    fn vitals_payload_scaling() {
        let p = VitalsPayload::from_values(72.0, 36.8);
        assert_eq!(p, VitalsPayload { bpm_x10: 720, temp_cx100: 3680 });
        assert_eq!(p.to_bytes(), [0x02, 0xD0, 0x0E, 0x60]);
        assert_eq!(VitalsPayload::from_bytes(&p.to_bytes()), Some(p));
        assert_eq!(VitalsPayload::from_bytes(&[1, 2, 3]), None);
    }

    fn arb_frame() -> impl Strategy<Value = Frame> {
        (
            any::<u16>(),
            any::<u8>(),
            any::<u8>(),
            prop_oneof![Just(FrameKind::Vitals), Just(FrameKind::Message)],
            prop_oneof![Just(0u8), Just(FLAG_ESCALATE)],
            proptest::collection::vec(any::<u8>(), 0..=MAX_PAYLOAD),
        )
            .prop_map(|(device_id, room_no, seq, kind, flags, payload)| Frame {
                device_id,
                room_no,
                seq,
                kind,
                flags,
                payload,
            })
    }

    proptest! {
        #[test]
        fn roundtrip(f in arb_frame()) {
            let bytes = encode_frame(&f).unwrap();
            prop_assert_eq!(bytes.len(), f.encoded_len());
            prop_assert_eq!(decode_frame(&bytes).unwrap(), f);
        }

        #[test]
        fn decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let _ = decode_frame(&bytes);
        }
    }
}
