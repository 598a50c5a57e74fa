#![cfg(feature = "server")]

mod common;

use std::sync::{Arc, RwLock};

use axum::http::StatusCode;
use common::http::{get, post};
use paracom_core::gateway::http::router;
use paracom_core::gateway::{Store, TelemetryRecord};
use serde_json::{json, Value};

fn app() -> axum::Router {
    router(Arc::new(RwLock::new(Store::in_memory())))
}

fn parse(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[tokio::test]
async fn ingest_then_latest_reads_the_write() {
    let app = app();
    let rec = json!({"device_id": 1, "room_no": 7, "t_ms": 500, "kind": "vitals", "bpm": 72.0, "temp_c": 36.8});
    let (status, body) = post(&app, "/api/v1/telemetry", rec.to_string()).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(parse(&body), json!({"id": 1}));

    let (status, body) = get(&app, "/api/v1/patients/1/latest").await;
    assert_eq!(status, StatusCode::OK);
    let got = parse(&body);
    assert_eq!(got["id"], 1);
    assert_eq!(got["bpm"], 72.0);
    assert!(got.get("message_text").is_none());
}

#[tokio::test]
async fn client_ids_are_ignored() {
    let app = app();
    let rec = json!({"id": 99, "device_id": 1, "room_no": 7, "t_ms": 0, "kind": "message", "message_text": "NEED FOOD"});
    let (_, body) = post(&app, "/api/v1/telemetry", rec.to_string()).await;
    assert_eq!(parse(&body), json!({"id": 1}));
}

#[tokio::test]
async fn invalid_records_are_422_and_not_stored() {
    let app = app();
    for bad in [
        json!({"device_id": 1, "room_no": 7, "t_ms": 0, "kind": "vitals", "bpm": 72.0}),
        json!({"device_id": 1, "room_no": 7, "t_ms": 0, "kind": "message", "bpm": 72.0, "message_text": "X"}),
        json!({"device_id": 1, "room_no": 7, "t_ms": 0, "kind": "alert", "message_text": "X"}),
    ] {
        let (status, body) = post(&app, "/api/v1/telemetry", bad.to_string()).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{bad}");
        assert_eq!(parse(&body)["error"], "validation");
    }
    let (status, _) = get(&app, "/api/v1/patients/1/latest").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn malformed_json_is_a_client_error() {
    let app = app();
    let (status, _) = post(&app, "/api/v1/telemetry", "{\"device_id\":".into()).await;
    assert!(status.is_client_error());
    let extra = json!({"device_id": 1, "room_no": 7, "t_ms": 0, "kind": "message", "message_text": "X", "colour": 1});
    let (status, _) = post(&app, "/api/v1/telemetry", extra.to_string()).await;
    assert!(status.is_client_error());
}

#[tokio::test]
async fn history_filters_and_limits() {
    let app = app();
    for t in [300u64, 100, 200, 400] {
        let rec = TelemetryRecord::vitals(2, 3, t, 70.0, 36.5);
        post(&app, "/api/v1/telemetry", serde_json::to_string(&rec).unwrap()).await;
    }
    let (_, body) = get(&app, "/api/v1/patients/2/history?since_ms=200").await;
    let times: Vec<u64> = parse(&body).as_array().unwrap().iter().map(|r| r["t_ms"].as_u64().unwrap()).collect();
    assert_eq!(times, [200, 300, 400]);

    let (_, body) = get(&app, "/api/v1/patients/2/history?limit=2").await;
    assert_eq!(parse(&body).as_array().unwrap().len(), 2);

    let (status, _) = get(&app, "/api/v1/patients/2/history?limit=0").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(&app, "/api/v1/patients/9/history").await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // Out-of-order arrival: latest is by time, not by id.
    let (_, body) = get(&app, "/api/v1/patients/2/latest").await;
    assert_eq!(parse(&body)["t_ms"], 400);
}

#[tokio::test]
async fn alerts_endpoint_and_status_page() {
    let app = app();
    let alert = json!({"device_id": 1, "room_no": 7, "t_ms": 900, "kind": "alert",
                       "anomaly": "BpmLow", "message_text": "ROOM 07: BPM LOW 40.0"});
    post(&app, "/api/v1/telemetry", alert.to_string()).await;
    let msg = json!({"device_id": 1, "room_no": 7, "t_ms": 950, "kind": "message", "message_text": "NEED WATER"});
    post(&app, "/api/v1/telemetry", msg.to_string()).await;

    let (_, body) = get(&app, "/api/v1/alerts").await;
    let alerts = parse(&body);
    assert_eq!(alerts.as_array().unwrap().len(), 1);
    assert_eq!(alerts[0]["anomaly"], "BpmLow");
    let (_, body) = get(&app, "/api/v1/alerts?since_ms=901").await;
    assert_eq!(parse(&body), json!([]));

    let (status, body) = get(&app, "/status").await;
    assert_eq!(status, StatusCode::OK);
    let page = String::from_utf8(body).unwrap();
    assert!(page.starts_with("PARACOM GATEWAY STATUS devices=1 records=2 alerts=1"), "{page}");
    assert!(page.contains("message=\"NEED WATER\""), "{page}");
}

#[tokio::test]
async fn unknown_device_path_is_rejected() {
    let app = app();
    let (status, _) = get(&app, "/api/v1/patients/70000/latest").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}
