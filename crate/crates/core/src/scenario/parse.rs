use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wire::ChannelConfig;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Directive {
    Tilt { pitch_deg: f64, roll_deg: f64, hold_ms: u64 },
    Vitals { bpm: f64, temp_c: f64 },
    Ack,
    Channel(ChannelConfig),
    ExpectLcd { text: String, by_ms: u64 },
    ExpectSms { substring: String, by_ms: u64 },
    ExpectAlert { substring: String, by_ms: u64 },
    ExpectNoSms { until_ms: u64 },
}

impl Directive {
    fn is_traffic(&self) -> bool {
        matches!(self, Directive::Tilt { .. } | Directive::Vitals { .. } | Directive::Ack)
    }

    pub fn is_expectation(&self) -> bool {
        matches!(
            self,
            Directive::ExpectLcd { .. }
                | Directive::ExpectSms { .. }
                | Directive::ExpectAlert { .. }
                | Directive::ExpectNoSms { .. }
        )
    }

    /// Last instant this directive needs the simulation to cover.
    pub fn horizon(&self, t_ms: u64) -> u64 {
        match self {
            Directive::Tilt { hold_ms, .. } => t_ms + hold_ms,
            Directive::ExpectLcd { by_ms, .. }
            | Directive::ExpectSms { by_ms, .. }
            | Directive::ExpectAlert { by_ms, .. } => *by_ms,
            Directive::ExpectNoSms { until_ms } => *until_ms,
            _ => t_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedDirective {
    pub t_ms: u64,
    /// 1-based source line.
    pub line: usize,
    pub directive: Directive,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub directives: Vec<TimedDirective>,
}

impl Scenario {
    pub fn channel(&self) -> Option<ChannelConfig> {
        self.directives.iter().find_map(|d| match d.directive {
            Directive::Channel(cfg) => Some(cfg),
            _ => None,
        })
    }

    pub fn horizon(&self) -> u64 {
        self.directives.iter().map(|d| d.directive.horizon(d.t_ms)).max().unwrap_or(0)
    }
}

/// Whitespace-separated words; double quotes group words, `#` outside
/// quotes starts a comment.
fn tokenize(line: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                quoted = true;
            }
            '#' if !in_quotes => break,
            c if c.is_whitespace() && !in_quotes => {
                if !current.is_empty() || quoted {
                    tokens.push(std::mem::take(&mut current));
                }
                quoted = false;
            }
            c => current.push(c),
        }
    }
    if in_quotes {
        return Err("unterminated quote".into());
    }
    if !current.is_empty() || quoted {
        tokens.push(current);
    }
    Ok(tokens)
}

fn num<T: std::str::FromStr>(tok: &str, what: &str) -> Result<T, String> {
    tok.parse().map_err(|_| format!("{what}: cannot parse {tok:?}"))
}

fn finite(tok: &str, what: &str) -> Result<f64, String> {
    let v: f64 = num(tok, what)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{what} must be finite"))
    }
}

fn probability(tok: &str, what: &str) -> Result<f64, String> {
    let v = finite(tok, what)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{what} must lie in [0, 1]"))
    }
}

fn angle(tok: &str, what: &str) -> Result<f64, String> {
    let v = finite(tok, what)?;
    if (-90.0..=90.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{what} must lie in [-90, 90]"))
    }
}

fn arity(args: &[String], n: usize, usage: &str) -> Result<(), String> {
    if args.len() == n {
        Ok(())
    } else {
        Err(format!("expected `{usage}`"))
    }
}

fn deadline(t_ms: u64, tok: &str, what: &str) -> Result<u64, String> {
    let v: u64 = num(tok, what)?;
    if v < t_ms {
        return Err(format!("{what} {v} precedes the directive time {t_ms}"));
    }
    Ok(v)
}

fn directive(t_ms: u64, name: &str, args: &[String]) -> Result<Directive, String> {
    Ok(match name {
        "tilt" => {
            arity(args, 3, "tilt <pitch_deg> <roll_deg> <hold_ms>")?;
            let hold_ms: u64 = num(&args[2], "hold_ms")?;
            if hold_ms == 0 {
                return Err("hold_ms must be positive".into());
            }
            Directive::Tilt {
                pitch_deg: angle(&args[0], "pitch_deg")?,
                roll_deg: angle(&args[1], "roll_deg")?,
                hold_ms,
            }
        }
        "vitals" => {
            arity(args, 2, "vitals <bpm> <temp_c>")?;
            let bpm = finite(&args[0], "bpm")?;
            let temp_c = finite(&args[1], "temp_c")?;
            if !(0.0..=6553.5).contains(&bpm) || !(0.0..=655.35).contains(&temp_c) {
                return Err("vitals out of encodable range".into());
            }
            Directive::Vitals { bpm, temp_c }
        }
        "ack" => {
            arity(args, 0, "ack")?;
            Directive::Ack
        }
        "channel" => {
            arity(args, 4, "channel <drop_p> <bitflip_p> <dup_p> <seed>")?;
            Directive::Channel(ChannelConfig {
                drop_p: probability(&args[0], "drop_p")?,
                bitflip_p: probability(&args[1], "bitflip_p")?,
                dup_p: probability(&args[2], "dup_p")?,
                seed: num(&args[3], "seed")?,
            })
        }
        "expect_lcd" => {
            arity(args, 2, "expect_lcd <text> <by_ms>")?;
            Directive::ExpectLcd { text: args[0].clone(), by_ms: deadline(t_ms, &args[1], "by_ms")? }
        }
        "expect_sms" => {
            arity(args, 2, "expect_sms <substring> <by_ms>")?;
            Directive::ExpectSms { substring: args[0].clone(), by_ms: deadline(t_ms, &args[1], "by_ms")? }
        }
        "expect_alert" => {
            arity(args, 2, "expect_alert <substring> <by_ms>")?;
            Directive::ExpectAlert { substring: args[0].clone(), by_ms: deadline(t_ms, &args[1], "by_ms")? }
        }
        "expect_no_sms" => {
            arity(args, 1, "expect_no_sms <until_ms>")?;
            Directive::ExpectNoSms { until_ms: deadline(t_ms, &args[0], "until_ms")? }
        }
        other => return Err(format!("unknown directive {other:?}")),
    })
}

/// Parse the line-oriented scenario language:
///
/// ```text
/// # comment
/// at <t_ms> <directive> <args...>
/// ```
///
/// Times must not decrease from one line to the next. At most one `channel`
/// directive is allowed, and it must come before any tilt, vitals or ack.
pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let mut directives: Vec<TimedDirective> = Vec::new();
    let mut seen_traffic = false;
    let mut seen_channel = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |reason: String| ParseError { line, reason };
        let tokens = tokenize(raw).map_err(err)?;
        let Some((head, rest)) = tokens.split_first() else { continue };
        if head != "at" {
            return Err(err(format!("expected `at <t_ms> <directive>`, found {head:?}")));
        }
        let [t, name, args @ ..] = rest else {
            return Err(err("expected `at <t_ms> <directive>`".into()));
        };
        let t_ms: u64 = num(t, "t_ms").map_err(err)?;
        if let Some(prev) = directives.last() {
            if t_ms < prev.t_ms {
                return Err(err(format!(
                    "time {t_ms} is earlier than {} on line {}; directives must be sorted",
                    prev.t_ms, prev.line
                )));
            }
        }
        let directive = directive(t_ms, name, args).map_err(err)?;
        match directive {
            Directive::Channel(_) if seen_channel => {
                return Err(err("only one channel directive is allowed".into()));
            }
            Directive::Channel(_) if seen_traffic => {
                return Err(err("channel directive must precede all traffic".into()));
            }
            Directive::Channel(_) => seen_channel = true,
            ref d if d.is_traffic() => seen_traffic = true,
            _ => {}
        }
        directives.push(TimedDirective { t_ms, line, directive });
    }
    Ok(Scenario { directives })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tilt() {
        let s = parse_scenario("at 0 tilt 40 0 600").unwrap();
        assert_eq!(
            s.directives,
            vec![TimedDirective {
                t_ms: 0,
                line: 1,
                directive: Directive::Tilt { pitch_deg: 40.0, roll_deg: 0.0, hold_ms: 600 }
            }]
        );
    }

    #[test]
    fn unknown_directive() {
        let e = parse_scenario("at 0 bogus").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn unsorted_times_name_the_line() {
        let e = parse_scenario("at 100 ack\n# comment\n\nat 50 ack").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.reason.contains("sorted"));
    }

    #[test]
    fn comments_quotes_and_blank_lines() {
        let text = r#"
            # header
            at 0 expect_lcd "WASH ROOM" 2000   # trailing
            at 0 expect_sms "ROOM 07: #1" 40000
            at 10 vitals 72 36.8
        "#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.directives.len(), 3);
        assert_eq!(s.directives[0].directive, Directive::ExpectLcd { text: "WASH ROOM".into(), by_ms: 2000 });
        assert_eq!(s.directives[0].line, 3);
        assert_eq!(
            s.directives[1].directive,
            Directive::ExpectSms { substring: "ROOM 07: #1".into(), by_ms: 40000 }
        );
        assert_eq!(s.horizon(), 40000);
    }

    #[test]
    fn channel_rules() {
        let ok = parse_scenario("at 0 channel 0.3 0 0.1 42\nat 0 tilt 40 0 600").unwrap();
        assert_eq!(ok.channel().unwrap().seed, 42);
        let late = parse_scenario("at 0 ack\nat 5 channel 0 0 0 1").unwrap_err();
        assert_eq!(late.line, 2);
        let twice = parse_scenario("at 0 channel 0 0 0 1\nat 0 channel 0 0 0 2").unwrap_err();
        assert_eq!(twice.line, 2);
        assert!(parse_scenario("at 0 channel 1.5 0 0 1").is_err());
    }

    #[test]
    fn argument_errors() {
        for bad in [
            "at x ack",
            "at 0 tilt 40 0",
            "at 0 tilt 95 0 100",
            "at 0 tilt 40 0 0",
            "at 0 ack now",
            "at 10 expect_lcd X 5",
            "at 0 expect_lcd \"OPEN 100",
            "tilt 40 0 100",
            "at 0",
        ] {
            assert!(parse_scenario(bad).is_err(), "{bad}");
        }
    }
}
