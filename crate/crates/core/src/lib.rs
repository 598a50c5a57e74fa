//! Assistive tilt-gesture messaging on a virtual clock.
//!
//! A patient unit classifies accelerometer tilt into pre-coded requests and
//! streams vitals over a CRC-protected RF frame link. A ward receiver
//! decodes the frames, drives a 16×2 display and buzzer, escalates
//! unattended requests by SMS through an emulated GSM modem, and publishes
//! telemetry to a gateway that remote staff can query.

pub mod gateway;
pub mod gesture;
pub mod modem;
pub mod receiver;
pub mod rng;
pub mod scenario;
pub mod transmitter;
pub mod vitals;
pub mod wire;
