#![allow(dead_code)]

use paracom_core::rng::SplitMix64;
use paracom_core::wire::{Frame, FrameKind, FLAG_ESCALATE, MAX_PAYLOAD};

/// Shift-register CRC-16/CCITT-FALSE, one bit at a time. Deliberately shares
/// nothing with the table-driven implementation under test.
pub fn crc16_bitwise(data: &[u8]) -> u16 {
    let mut reg: u32 = 0xFFFF;
    for &byte in data {
        for i in (0..8).rev() {
            let feedback = ((reg >> 15) & 1) ^ u32::from((byte >> i) & 1);
            reg = (reg << 1) & 0xFFFF;
            if feedback == 1 {
                reg ^= 0x1021;
            }
        }
    }
    reg as u16
}

pub fn random_bytes(rng: &mut SplitMix64, max_len: usize) -> Vec<u8> {
    let len = (rng.next_u64() % (max_len as u64 + 1)) as usize;
    (0..len).map(|_| rng.next_u64() as u8).collect()
}

pub fn random_frame(rng: &mut SplitMix64) -> Frame {
    let r = rng.next_u64();
    Frame {
        device_id: r as u16,
        room_no: (r >> 16) as u8,
        seq: (r >> 24) as u8,
        kind: if r >> 32 & 1 == 0 { FrameKind::Vitals } else { FrameKind::Message },
        flags: if r >> 33 & 1 == 0 { 0 } else { FLAG_ESCALATE },
        payload: random_bytes(rng, MAX_PAYLOAD),
    }
}

#[cfg(feature = "server")]
pub mod http {
    use axum::body::Body;
    use axum::http::{Method, Request, StatusCode};
    use axum::Router;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    pub async fn call(app: &Router, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
        let mut req = Request::builder().method(method).uri(uri);
        if body.is_some() {
            req = req.header("content-type", "application/json");
        }
        let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
        let resp = app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        (status, bytes)
    }

    pub async fn get(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
        call(app, Method::GET, uri, None).await
    }

    pub async fn post(app: &Router, uri: &str, body: String) -> (StatusCode, Vec<u8>) {
        call(app, Method::POST, uri, Some(body)).await
    }
}
