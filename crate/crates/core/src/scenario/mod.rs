//! Deterministic end-to-end harness: scenario scripts drive the patient
//! unit, the lossy link, the receiver, the modem and the gateway on one
//! virtual clock.

mod config;
mod parse;
mod run;

pub use config::{ConfigError, SimConfig};
pub use parse::{parse_scenario, Directive, ParseError, Scenario, TimedDirective};
pub use run::{run, EventLog, ExpectationResult, LogEntry, RunReport, SharedBuffer, TAIL_MS};

/// Built-in demonstration: one request per tilt direction, each attended
/// before the caregiver would be texted.
pub const DEMO: &str = r#"# Four requests, one per tilt direction, each acknowledged in time.
at 0     vitals 72 36.8
at 0     expect_no_sms 13000
at 1000  tilt 40 0 800
at 1000  expect_lcd "EMERGENCY" 2000
at 3000  ack
at 4000  tilt -40 0 800
at 4000  expect_lcd "WASH ROOM" 5000
at 6000  ack
at 7000  tilt 0 -40 800
at 7000  expect_lcd "NEED WATER" 8000
at 9000  ack
at 10000 tilt 0 40 800
at 10000 expect_lcd "NEED FOOD" 11000
at 12000 ack
at 12000 expect_lcd "READY" 12000
"#;
