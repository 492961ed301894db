//! Scenario runner behind the `maxsing` binary.
//!
//! A scenario is a command name plus a JSON payload. [`run`] dispatches it to
//! the engines in `maxsing-core` and returns a [`Report`] whose JSON form is
//! canonical: keys sorted, rationals as lowest-terms `"p/q"` strings, and no
//! wall-clock data, so identical inputs give byte-identical output.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use maxsing_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

mod commands;
mod oracles;
mod render;

pub use oracles::{run_oracles, OracleScope, DEFAULT_SEED, ORACLE_NAMES};

/// Version of the payload and report schemas under `schemas/`.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Factor,
    Valgraph,
    Bound,
    Untwist,
    Exclude,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Factor => "factor",
            Command::Valgraph => "valgraph",
            Command::Bound => "bound",
            Command::Untwist => "untwist",
            Command::Exclude => "exclude",
            Command::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| format!("unknown command {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputMode {
    Text,
    #[default]
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRequest {
    pub command: Command,
    pub payload: Value,
    pub output_mode: OutputMode,
    /// Seed for generated inputs; each command documents its default.
    pub seed: Option<u64>,
}

impl ScenarioRequest {
    pub fn new(command: Command, payload: Value) -> Self {
        ScenarioRequest { command, payload, output_mode: OutputMode::Json, seed: None }
    }

    /// Parses the payload text; malformed JSON becomes an error report with
    /// exit code 1 instead of a request.
    pub fn from_text(command: Command, text: &str) -> Result<Self, Report> {
        serde_json::from_str(text)
            .map(|payload| ScenarioRequest::new(command, payload))
            .map_err(|e| Report::failure(command, &Failure::malformed(format!("payload is not valid JSON: {e}"))))
    }
}

/// Outcome of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub exit_code: i32,
    pub result: Option<Value>,
    pub error: Option<Value>,
    /// Wall-clock time; shown in text mode only.
    pub elapsed: Duration,
}

impl Report {
    fn success(command: Command, result: Value, exit_code: i32) -> Self {
        Report { command, exit_code, result: Some(result), error: None, elapsed: Duration::ZERO }
    }

    fn failure(command: Command, f: &Failure) -> Self {
        let mut err = Map::new();
        err.insert("kind".into(), json!(f.kind));
        err.insert("message".into(), json!(f.message));
        if let Some(d) = &f.details {
            err.insert("details".into(), d.clone());
        }
        Report {
            command,
            exit_code: f.exit_code,
            result: None,
            error: Some(Value::Object(err)),
            elapsed: Duration::ZERO,
        }
    }

    pub fn status(&self) -> &'static str {
        match (self.exit_code, &self.error) {
            (EXIT_OK, _) => "ok",
            (_, None) => "failed",
            _ => "error",
        }
    }

    /// The comparable part of the report.
    pub fn to_value(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command.name(),
            "status": self.status(),
            "exit_code": self.exit_code,
            "result": self.result,
            "error": self.error,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&sorted(self.to_value())).expect("values always serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        render::text(self)
    }

    pub fn render(&self, mode: OutputMode) -> String {
        match mode {
            OutputMode::Json => self.to_json(),
            OutputMode::Text => self.to_text(),
        }
    }
}

/// Rebuilds every object with its keys in sorted order, whatever map type
/// `serde_json` was compiled with.
pub fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

/// An error report in the making.
#[derive(Debug, Clone)]
pub(crate) struct Failure {
    kind: &'static str,
    message: String,
    details: Option<Value>,
    exit_code: i32,
}

impl Failure {
    pub(crate) fn malformed(message: impl Into<String>) -> Self {
        Failure { kind: "malformed_input", message: message.into(), details: None, exit_code: EXIT_MALFORMED }
    }

    pub(crate) fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::MalformedInput(_) => "malformed_input",
            Error::InvariantViolation(_) => "invariant_violation",
            Error::InfinitelyNearObstruction { .. } => "infinitely_near_obstruction",
            Error::DegenerateResult(_) => "degenerate_result",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidGraph(_) => "invalid_graph",
            Error::NotCompatible { .. } => "not_compatible",
            Error::DegenerateGraph(_) => "degenerate_graph",
            Error::PreconditionFailed(_) => "precondition_failed",
        };
        let details = match &e {
            Error::InfinitelyNearObstruction { point, steps, obstruction } => Some(json!({
                "point": point,
                "steps": steps,
                "obstruction": obstruction,
            })),
            Error::NotCompatible { vertex } => Some(json!({ "vertex": vertex })),
            _ => None,
        };
        let exit_code = if e.is_malformed() { EXIT_MALFORMED } else { EXIT_PRECONDITION };
        Failure { kind, message: e.to_string(), details, exit_code }
    }
}

pub(crate) fn parse_payload<T: serde::de::DeserializeOwned>(payload: &Value) -> Result<T, Failure> {
    T::deserialize(payload).map_err(|e| Failure::malformed(format!("payload does not match the schema: {e}")))
}

/// Dispatches one scenario.
pub fn run(request: &ScenarioRequest) -> Report {
    let start = Instant::now();
    let outcome = match request.command {
        Command::Factor => commands::factor(&request.payload, request.seed),
        Command::Valgraph => commands::valgraph(&request.payload),
        Command::Bound => commands::bound(&request.payload),
        Command::Untwist => commands::untwist(&request.payload),
        Command::Exclude => commands::exclude(&request.payload),
        Command::Oracle => oracles::oracle_command(&request.payload, request.seed),
    };
    let mut report = match outcome {
        Ok((result, code)) => Report::success(request.command, result, code),
        Err(f) => Report::failure(request.command, &f),
    };
    report.elapsed = start.elapsed();
    report
}
