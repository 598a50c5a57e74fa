//! Emulated GSM modem speaking the text-mode AT dialog.
//!
//! The cellular network is the outbox: every accepted message is appended
//! to it (and to the optional line log) and never modified afterwards.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_BODY_CHARS: usize = 160;
/// Ctrl-Z, terminates a message body.
pub const CTRL_Z: char = '\u{1A}';
/// Escape, abandons a message body.
pub const ESC: char = '\u{1B}';

#[derive(Debug, Error)]
pub enum ModemError {
    #[error("message body has {0} characters, limit is {MAX_BODY_CHARS}")]
    BodyTooLong(usize),
    #[error("message body contains a control terminator")]
    InvalidBody,
    #[error("modem is in the middle of a manual message")]
    Busy,
    #[error("modem rejected the dialog: {0:?}")]
    Rejected(String),
    #[error("outbox log: {0}")]
    Io(#[from] io::Error),
    #[error("outbox log line {line}: {source}")]
    BadLogLine { line: usize, source: serde_json::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModemMode {
    Idle,
    TextModeSet,
    AwaitingBody { to: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmsRecord {
    pub index: u32,
    pub to: String,
    pub body: String,
    pub t_ms: u64,
}

pub struct Modem {
    mode: ModemMode,
    outbox: Vec<SmsRecord>,
    next_index: u32,
    body_buf: String,
    log: Option<Box<dyn Write + Send>>,
}

impl std::fmt::Debug for Modem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Modem")
            .field("mode", &self.mode)
            .field("outbox", &self.outbox)
            .field("next_index", &self.next_index)
            .finish_non_exhaustive()
    }
}

impl Default for Modem {
    fn default() -> Self {
        Self::new()
    }
}

impl Modem {
    pub fn new() -> Self {
        Self {
            mode: ModemMode::Idle,
            outbox: Vec::new(),
            next_index: 1,
            body_buf: String::new(),
            log: None,
        }
    }

    /// Every accepted message is also written to `sink` as one JSON line.
    pub fn with_log(sink: impl Write + Send + 'static) -> Self {
        Self { log: Some(Box::new(sink)), ..Self::new() }
    }

    pub fn mode(&self) -> &ModemMode {
        &self.mode
    }

    pub fn outbox(&self) -> &[SmsRecord] {
        &self.outbox
    }

    /// Execute one command line, or one chunk of body text while a message
    /// is open. Protocol errors are answered with `ERROR` and leave the
    /// mode untouched.
    pub fn exec(&mut self, input: &str, now_ms: u64) -> String {
        if let ModemMode::AwaitingBody { to } = &self.mode {
            let to = to.clone();
            return self.body_chunk(to, input, now_ms);
        }

        let line = input.trim_end_matches(['\r', '\n']).trim();
        let upper = line.to_ascii_uppercase();
        match upper.as_str() {
            "AT" => "OK".into(),
            "AT+CMGF=1" => {
                self.mode = ModemMode::TextModeSet;
                "OK".into()
            }
            _ if upper.starts_with("AT+CMGS=") && self.mode == ModemMode::TextModeSet => {
                match parse_number(&line["AT+CMGS=".len()..]) {
                    Some(to) => {
                        self.body_buf.clear();
                        self.mode = ModemMode::AwaitingBody { to };
                        "> ".into()
                    }
                    None => "ERROR".into(),
                }
            }
            _ => "ERROR".into(),
        }
    }

    fn body_chunk(&mut self, to: String, input: &str, now_ms: u64) -> String {
        if input.contains(ESC) {
            self.body_buf.clear();
            self.mode = ModemMode::TextModeSet;
            return "OK".into();
        }
        let Some(pos) = input.find(CTRL_Z) else {
            if !self.body_buf.is_empty() {
                self.body_buf.push('\n');
            }
            self.body_buf.push_str(input.trim_end_matches(['\r', '\n']));
            return "> ".into();
        };
        if !self.body_buf.is_empty() {
            self.body_buf.push('\n');
        }
        self.body_buf.push_str(&input[..pos]);
        let body = std::mem::take(&mut self.body_buf);
        self.mode = ModemMode::TextModeSet;
        if body.chars().count() > MAX_BODY_CHARS {
            return "ERROR".into();
        }
        let record = SmsRecord { index: self.next_index, to, body, t_ms: now_ms };
        if let Some(log) = self.log.as_mut() {
            let written = serde_json::to_string(&record)
                .map_err(io::Error::other)
                .and_then(|line| writeln!(log, "{line}"))
                .and_then(|()| log.flush());
            if written.is_err() {
                return "ERROR".into();
            }
        }
        self.next_index += 1;
        let index = record.index;
        self.outbox.push(record);
        format!("+CMGS: {index}\r\nOK")
    }

    /// Send one message by driving the full AT dialog; returns its index.
    pub fn send_sms(&mut self, to: &str, body: &str, now_ms: u64) -> Result<u32, ModemError> {
        let chars = body.chars().count();
        if chars > MAX_BODY_CHARS {
            return Err(ModemError::BodyTooLong(chars));
        }
        if body.contains([CTRL_Z, ESC]) {
            return Err(ModemError::InvalidBody);
        }
        if matches!(self.mode, ModemMode::AwaitingBody { .. }) {
            return Err(ModemError::Busy);
        }
        let expect = |resp: String, want: &str| {
            if resp == want {
                Ok(())
            } else {
                Err(ModemError::Rejected(resp))
            }
        };
        expect(self.exec("AT", now_ms), "OK")?;
        expect(self.exec("AT+CMGF=1", now_ms), "OK")?;
        expect(self.exec(&format!("AT+CMGS=\"{to}\""), now_ms), "> ")?;
        let resp = self.exec(&format!("{body}{CTRL_Z}"), now_ms);
        resp.strip_prefix("+CMGS: ")
            .and_then(|rest| rest.strip_suffix("\r\nOK"))
            .and_then(|n| n.parse().ok())
            .ok_or(ModemError::Rejected(resp))
    }
}

fn parse_number(arg: &str) -> Option<String> {
    let inner = arg.trim().strip_prefix('"')?.strip_suffix('"')?;
    let digits = inner.strip_prefix('+').unwrap_or(inner);
    (!digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())).then(|| inner.to_string())
}

/// Read an outbox log written through [`Modem::with_log`].
pub fn read_outbox(reader: impl BufRead) -> Result<Vec<SmsRecord>, ModemError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| ModemError::BadLogLine { line: i + 1, source })?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::{Arc, Mutex};

    #[derive(Clone, Default)]
    struct Shared(Arc<Mutex<Vec<u8>>>);

    impl Write for Shared {
        fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
            self.0.lock().unwrap().write(buf)
        }
        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn at_is_ok() {
        let mut m = Modem::new();
        assert_eq!(m.exec("AT", 0), "OK");
        assert_eq!(m.mode(), &ModemMode::Idle);
    }

    #[test]
    fn manual_dialog() {
        let mut m = Modem::new();
        assert_eq!(m.exec("AT\r", 0), "OK");
        assert_eq!(m.exec("AT+CMGF=1", 0), "OK");
        assert_eq!(m.exec("AT+CMGS=\"+15550100\"", 0), "> ");
        let resp = m.exec("ROOM 07: EMERGENCY\u{1A}", 5);
        assert!(resp.contains("+CMGS: 1"), "{resp}");
        assert!(resp.ends_with("OK"));
        assert_eq!(
            m.outbox(),
            &[SmsRecord { index: 1, to: "+15550100".into(), body: "ROOM 07: EMERGENCY".into(), t_ms: 5 }]
        );
        assert_eq!(m.mode(), &ModemMode::TextModeSet);
    }

    #[test]
    fn cmgs_before_cmgf_is_error() {
        let mut m = Modem::new();
        assert_eq!(m.exec("AT+CMGS=\"+15550100\"", 0), "ERROR");
        assert_eq!(m.mode(), &ModemMode::Idle);
        assert!(m.outbox().is_empty());
    }

    #[test]
    fn pdu_mode_and_garbage_rejected() {
        let mut m = Modem::new();
        assert_eq!(m.exec("AT+CMGF=0", 0), "ERROR");
        assert_eq!(m.exec("hello", 0), "ERROR");
        m.exec("AT+CMGF=1", 0);
        assert_eq!(m.exec("AT+CMGS=15550100", 0), "ERROR");
        assert_eq!(m.exec("AT+CMGS=\"\"", 0), "ERROR");
        assert_eq!(m.mode(), &ModemMode::TextModeSet);
    }

    #[test]
    fn multi_line_body_and_escape() {
        let mut m = Modem::new();
        m.exec("AT+CMGF=1", 0);
        m.exec("AT+CMGS=\"123\"", 0);
        assert_eq!(m.exec("first", 0), "> ");
        assert_eq!(m.exec("second\u{1A}", 0), "+CMGS: 1\r\nOK");
        assert_eq!(m.outbox()[0].body, "first\nsecond");
        m.exec("AT+CMGS=\"123\"", 0);
        assert_eq!(m.exec("never\u{1B}", 0), "OK");
        assert_eq!(m.outbox().len(), 1);
    }

    #[test]
    fn send_sms_indices() {
        let mut m = Modem::new();
        assert_eq!(m.send_sms("+1", "a", 0).unwrap(), 1);
        assert_eq!(m.send_sms("+2", "b", 1).unwrap(), 2);
    }

    #[test]
    fn body_limit() {
        let mut m = Modem::new();
        let long = "x".repeat(161);
        assert!(matches!(m.send_sms("+1", &long, 0), Err(ModemError::BodyTooLong(161))));
        assert!(m.outbox().is_empty());
        assert_eq!(m.send_sms("+1", &"x".repeat(160), 0).unwrap(), 1);
        // Manual path rejects it too, and the modem stays usable.
        m.exec("AT+CMGS=\"1\"", 0);
        assert_eq!(m.exec(&format!("{long}\u{1A}"), 0), "ERROR");
        assert_eq!(m.mode(), &ModemMode::TextModeSet);
        assert_eq!(m.outbox().len(), 1);
    }

    #[test]
    fn busy_modem_refuses_send() {
        let mut m = Modem::new();
        m.exec("AT+CMGF=1", 0);
        m.exec("AT+CMGS=\"1\"", 0);
        assert!(matches!(m.send_sms("+1", "x", 0), Err(ModemError::Busy)));
    }

    #[test]
    fn log_lines_roundtrip() {
        let sink = Shared::default();
        let mut m = Modem::with_log(sink.clone());
        for (i, to) in ["+1", "+2", "+3"].iter().enumerate() {
            m.send_sms(to, "ROOM 07: BPM LOW 40.0", i as u64).unwrap();
        }
        let bytes = sink.0.lock().unwrap().clone();
        let parsed = read_outbox(bytes.as_slice()).unwrap();
        assert_eq!(parsed, m.outbox());
    }

    fn command() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("AT".to_string()),
            Just("AT+CMGF=1".to_string()),
            Just("AT+CMGF=0".to_string()),
            Just("AT+CMGS=\"+15550100\"".to_string()),
            Just("AT+CMGS=oops".to_string()),
            "[a-zA-Z0-9 :]{0,20}".prop_map(|s| s),
            "[a-zA-Z0-9 :]{0,20}".prop_map(|s| format!("{s}\u{1A}")),
            Just("\u{1B}".to_string()),
        ]
    }

    proptest! {
        #[test]
        fn outbox_indexed_without_gaps(cmds in proptest::collection::vec(command(), 0..60)) {
            let mut m = Modem::new();
            for (t, c) in cmds.iter().enumerate() {
                let resp = m.exec(c, t as u64);
                prop_assert!(["OK", "ERROR", "> "].contains(&resp.as_str()) || resp.starts_with("+CMGS: "));
            }
            for (i, r) in m.outbox().iter().enumerate() {
                prop_assert_eq!(r.index as usize, i + 1);
                prop_assert!(r.body.chars().count() <= MAX_BODY_CHARS);
            }
        }

        #[test]
        fn send_sms_matches_manual_dialog(bodies in proptest::collection::vec("[A-Z0-9 :.]{0,40}", 1..8)) {
            let mut auto = Modem::new();
            let mut manual = Modem::new();
            for (t, body) in bodies.iter().enumerate() {
                auto.send_sms("+15550100", body, t as u64).unwrap();
                manual.exec("AT", t as u64);
                manual.exec("AT+CMGF=1", t as u64);
                manual.exec("AT+CMGS=\"+15550100\"", t as u64);
                manual.exec(&format!("{body}\u{1A}"), t as u64);
            }
            prop_assert_eq!(auto.outbox(), manual.outbox());
        }
    }
}
