use paracom_core::gateway::Store;
use paracom_core::modem::read_outbox;
use paracom_core::scenario::{parse_scenario, run, SimConfig, DEMO};
use proptest::prelude::*;

fn exec(text: &str, seed: u64) -> paracom_core::scenario::RunReport {
    run(&parse_scenario(text).unwrap(), &SimConfig::default(), seed)
}

#[test]
fn demo_passes_without_any_sms() {
    let report = exec(DEMO, 0);
    assert!(report.passed(), "{}", report.log.to_text());
    assert!(report.outbox.is_empty());
}

#[test]
fn held_tilt_escalates_to_caregiver() {
    let report = exec("at 0 tilt 40 0 3500\n", 0);
    assert_eq!(report.caregiver_sms.len(), 1);
    assert_eq!(report.outbox[0].body, "ROOM 07: EMERGENCY");
    assert_eq!(report.outbox[0].to, SimConfig::default().receiver.caregiver_number);
}

#[test]
fn same_seed_same_log() {
    let text = "at 0 channel 0.3 0.001 0.1 5\nat 0 vitals 45 36.9\nat 100 tilt 0 40 3200\nat 6000 ack\n";
    let a = exec(text, 17);
    let b = exec(text, 17);
    assert_eq!(a.log.to_text(), b.log.to_text());
    assert_eq!(a.log.to_lines(), b.log.to_lines());
    assert_eq!(a.outbox_log, b.outbox_log);
    assert_eq!(a.telemetry_log, b.telemetry_log);
    let c = exec(text, 18);
    assert_ne!(a.log.to_text(), c.log.to_text());
}

#[test]
fn persisted_logs_reload() {
    let report = exec("at 0 vitals 130 39.0\nat 200 tilt -40 0 3500\n", 0);
    assert_eq!(read_outbox(report.outbox_log.as_slice()).unwrap(), report.outbox);
    let replayed = Store::replay(report.telemetry_log.as_slice()).unwrap();
    assert_eq!(replayed.records(), report.store.records());
    assert_eq!(replayed.status_page(), report.store.status_page());
}

#[test]
fn corrupted_frames_never_reach_the_display() {
    // Heavy bit damage: anything that gets through must still be one of the
    // mapped messages, never garbage.
    let report = exec("at 0 channel 0 0.01 0 9\nat 0 tilt 40 0 800\nat 3000 ack\n", 0);
    for (_, row) in &report.lcd_history {
        let text = row.trim_end();
        assert!(["READY", "EMERGENCY"].contains(&text), "{text:?}");
    }
    assert!(report.channel.corrupted > 0);
}

fn directions() -> impl Strategy<Value = (f64, f64)> {
    prop_oneof![Just((40.0, 0.0)), Just((-40.0, 0.0)), Just((0.0, -40.0)), Just((0.0, 40.0))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Lossless link: each request gesture lights the display exactly once,
    /// despite three copies on the air.
    #[test]
    fn one_effect_set_per_logical_message(gestures in proptest::collection::vec(directions(), 1..5)) {
        let mut text = String::new();
        for (i, (p, r)) in gestures.iter().enumerate() {
            let t = 1000 + i as u64 * 3000;
            text.push_str(&format!("at {t} tilt {p} {r} 800\nat {} ack\n", t + 2000));
        }
        let report = exec(&text, 0);
        let lit = report.lcd_history.iter().filter(|(_, row)| row.trim_end() != "READY").count();
        prop_assert_eq!(lit, gestures.len());
        let dupes = report.log.entries().iter().filter(|e| e.description.contains("duplicate")).count();
        prop_assert_eq!(dupes, gestures.len() * 2);
    }

    /// Prompt acknowledgement and short holds never text anyone.
    #[test]
    fn acknowledged_requests_stay_silent(
        gestures in proptest::collection::vec((directions(), 600u64..2900, 0u64..25_000), 1..4),
    ) {
        let mut text = String::from("at 0 vitals 72 36.8\n");
        let mut t = 500;
        for ((p, r), hold, ack_delay) in &gestures {
            text.push_str(&format!("at {t} tilt {p} {r} {hold}\n"));
            t += hold + ack_delay;
            text.push_str(&format!("at {t} ack\n"));
            t += 500;
        }
        text.push_str(&format!("at {t} expect_no_sms {}\n", t + 1000));
        let report = exec(&text, 0);
        prop_assert!(report.passed(), "{}", report.log.to_text());
        prop_assert!(report.outbox.is_empty());
    }
}
