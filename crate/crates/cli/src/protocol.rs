//! Newline-delimited JSON protocol for remote agents.
//!
//! Requests are objects tagged by `"type"`:
//!
//! ```text
//! {"type":"spaces"}
//! {"type":"reset","seed":42}          seed optional
//! {"type":"step","actions":{"0":17}}  pair id -> action index
//! {"type":"close"}
//! ```
//!
//! Every request gets exactly one reply line. Failures reply
//! `{"type":"error","code":...,"message":...}` and keep the session open.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use d2d_core::env::{EnvError, JointAction, Observations, Rewards, SpacesDescription};
use d2d_core::{D2dEnv, PairId, ScenarioConfig, StepMetrics};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::format::to_line;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    Spaces,
    Reset {
        #[serde(default)]
        seed: Option<u64>,
    },
    Step {
        #[serde(deserialize_with = "pair_keyed")]
        actions: JointAction,
    },
    Close,
}

/// Object keys are pair ids written as decimal strings.
fn pair_keyed<'de, D: Deserializer<'de>>(deserializer: D) -> Result<JointAction, D::Error> {
    BTreeMap::<String, usize>::deserialize(deserializer)?
        .into_iter()
        .map(|(k, v)| {
            k.parse().map(|n| (PairId(n), v)).map_err(|_| {
                de::Error::custom(format!("pair id {k:?} is not a non-negative integer"))
            })
        })
        .collect()
}

const REQUEST_TYPES: [&str; 4] = ["spaces", "reset", "step", "close"];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Reply {
    Spaces(SpacesDescription),
    Reset {
        observations: Observations,
    },
    Step {
        observations: Observations,
        rewards: Rewards,
        done: bool,
        info: StepMetrics,
    },
    Closed,
    Error {
        code: ErrorCode,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    UnknownType,
    ResetRequired,
    EpisodeDone,
    InvalidAction,
    Simulation,
}

impl Reply {
    fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Reply::Error {
            code,
            message: message.into(),
        }
    }
}

impl From<EnvError> for Reply {
    fn from(e: EnvError) -> Self {
        let code = match e {
            EnvError::ResetRequired => ErrorCode::ResetRequired,
            EnvError::EpisodeDone => ErrorCode::EpisodeDone,
            EnvError::UnknownPair(_) | EnvError::ActionOutOfRange { .. } => {
                ErrorCode::InvalidAction
            }
            EnvError::InvalidConfig(_) | EnvError::Sim(_) => ErrorCode::Simulation,
        };
        Reply::error(code, e.to_string())
    }
}

/// Parses one request line, distinguishing unknown types from malformed
/// messages.
pub fn parse_request(line: &str) -> Result<Request, Box<Reply>> {
    let fail = |code, message: String| Box::new(Reply::error(code, message));
    let value: Value =
        serde_json::from_str(line).map_err(|e| fail(ErrorCode::Malformed, e.to_string()))?;
    match value.get("type").and_then(Value::as_str) {
        None => Err(fail(
            ErrorCode::Malformed,
            "message needs a string \"type\" field".into(),
        )),
        Some(t) if !REQUEST_TYPES.contains(&t) => Err(fail(
            ErrorCode::UnknownType,
            format!(
                "unknown message type {t:?}; expected one of {}",
                REQUEST_TYPES.join(", ")
            ),
        )),
        Some(_) => {
            serde_json::from_value(value).map_err(|e| fail(ErrorCode::Malformed, e.to_string()))
        }
    }
}

/// One client's environment.
#[derive(Debug)]
pub struct Session {
    env: D2dEnv,
    closed: bool,
}

impl Session {
    pub fn new(config: ScenarioConfig) -> Result<Self, EnvError> {
        Ok(Self {
            env: D2dEnv::new(config)?,
            closed: false,
        })
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn handle(&mut self, request: Request) -> Reply {
        match request {
            Request::Spaces => Reply::Spaces(self.env.spaces()),
            Request::Reset { seed } => match self.env.reset(seed) {
                Ok(observations) => Reply::Reset { observations },
                Err(e) => e.into(),
            },
            Request::Step { actions } => match self.env.step(&actions) {
                Ok(r) => Reply::Step {
                    observations: r.observations,
                    rewards: r.rewards,
                    done: r.done,
                    info: r.info.metrics,
                },
                Err(e) => e.into(),
            },
            Request::Close => {
                self.closed = true;
                Reply::Closed
            }
        }
    }

    /// Reply line for one request line, without the newline.
    pub fn handle_line(&mut self, line: &str) -> String {
        let reply = match parse_request(line) {
            Ok(request) => self.handle(request),
            Err(reply) => *reply,
        };
        to_line(&reply).unwrap_or_else(|e| {
            format!(
                r#"{{"type":"error","code":"simulation","message":{}}}"#,
                Value::from(e.to_string())
            )
        })
    }
}

/// Serves one session until `close` or end of input. Blank lines are skipped.
pub fn serve_stream(
    config: ScenarioConfig,
    input: impl BufRead,
    mut output: impl Write,
) -> io::Result<()> {
    let mut session =
        Session::new(config).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(output, "{}", session.handle_line(&line))?;
        output.flush()?;
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}

fn serve_connection(config: ScenarioConfig, stream: TcpStream) -> io::Result<()> {
    let reader = io::BufReader::new(stream.try_clone()?);
    serve_stream(config, reader, stream)
}

/// Accepts connections forever, one thread and one environment each.
pub fn serve_listener(config: ScenarioConfig, listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let config = config.clone();
        thread::spawn(move || {
            if let Err(e) = serve_connection(config, stream) {
                eprintln!("session ended with error: {e}");
            }
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session() -> Session {
        Session::new(ScenarioConfig::default().with_due_pairs(2)).unwrap()
    }

    fn reply(s: &mut Session, line: &str) -> Value {
        serde_json::from_str(&s.handle_line(line)).unwrap()
    }

    #[test]
    fn step_before_reset() {
        let r = reply(&mut session(), r#"{"type":"step","actions":{}}"#);
        assert_eq!(r["type"], "error");
        assert_eq!(r["code"], "reset_required");
        assert_eq!(r["message"], "reset required");
    }

    #[test]
    fn error_codes() {
        let mut s = session();
        assert_eq!(reply(&mut s, "{not json")["code"], "malformed");
        assert_eq!(reply(&mut s, r#"{"kind":"reset"}"#)["code"], "malformed");
        assert_eq!(reply(&mut s, r#"{"type":"train"}"#)["code"], "unknown_type");
        assert_eq!(reply(&mut s, r#"{"type":"step"}"#)["code"], "malformed");
        assert_eq!(
            reply(&mut s, r#"{"type":"reset","seed":-1}"#)["code"],
            "malformed"
        );
        reply(&mut s, r#"{"type":"reset","seed":1}"#);
        assert_eq!(
            reply(&mut s, r#"{"type":"step","actions":{"5":0}}"#)["code"],
            "invalid_action"
        );
        assert_eq!(
            reply(&mut s, r#"{"type":"step","actions":{"0":525}}"#)["code"],
            "invalid_action"
        );
        assert_eq!(
            reply(&mut s, r#"{"type":"step","actions":{"a":1}}"#)["code"],
            "malformed"
        );
        assert!(!s.is_closed());
    }

    #[test]
    fn episode_runs_to_done() {
        let mut s = session();
        reply(&mut s, r#"{"type":"reset"}"#);
        for k in 1..=10 {
            let r = reply(&mut s, r#"{"type":"step","actions":{"0":3,"1":40}}"#);
            assert_eq!(r["type"], "step");
            assert_eq!(r["done"], k == 10);
            assert_eq!(r["info"]["step"], k - 1);
        }
        assert_eq!(
            reply(&mut s, r#"{"type":"step","actions":{}}"#)["code"],
            "episode_done"
        );
        assert_eq!(reply(&mut s, r#"{"type":"close"}"#)["type"], "closed");
        assert!(s.is_closed());
    }

    #[test]
    fn stream_stops_at_close() {
        let input = "{\"type\":\"spaces\"}\n\n{\"type\":\"close\"}\n{\"type\":\"spaces\"}\n";
        let mut out = Vec::new();
        serve_stream(ScenarioConfig::default(), input.as_bytes(), &mut out).unwrap();
        let lines: Vec<&str> = std::str::from_utf8(&out).unwrap().lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].contains("closed"));
    }
}
