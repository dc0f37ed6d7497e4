use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use spectral_witness::optim::TracePoint;
use spectral_witness::{Error, WitnessCondition};

use crate::document::DocumentError;

/// Verdict carried in every report as `"status"`; the exit code is a
/// function of this field alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Holds,
    Violated,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Violated => "violated",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Holds => 0,
            Status::Violated => 1,
            Status::Inconclusive => 3,
        }
    }

    pub fn from_report(report: &Value) -> Option<Status> {
        match report.get("status")?.as_str()? {
            "holds" => Some(Status::Holds),
            "violated" => Some(Status::Violated),
            "inconclusive" => Some(Status::Inconclusive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub fields: Map<String, Value>,
    /// Replaces the generic `key: value` rendering in text mode.
    pub text: Option<String>,
    pub trace: Vec<TracePoint>,
}

impl Outcome {
    pub fn new(command: &str, status: Status) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), command.into());
        fields.insert("status".into(), status.as_str().into());
        Outcome { status, fields, text: None, trace: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.insert(key.into(), value.into());
        self
    }

    pub fn json(&self) -> Value {
        Value::Object(self.fields.clone())
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(&self.json()).expect("reports serialize")
    }

    pub fn render_text(&self) -> String {
        if let Some(t) = &self.text {
            return t.clone();
        }
        self.fields
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}: {s}"),
                other => format!("{k}: {other}"),
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Serialize)]
struct TraceRow {
    start: usize,
    iteration: usize,
    value: f64,
}

pub fn write_trace(path: &Path, trace: &[TracePoint]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for p in trace {
        w.serialize(TraceRow { start: p.start, iteration: p.iteration, value: p.value })
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Io(String),
    Library(Error),
}

impl CliError {
    /// Hypothesis failures of the builder are verdicts rather than errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(Error::Hypothesis(_)) => 1,
            CliError::Library(Error::NoWitnessFound) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Io(m) => f.write_str(m),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl From<DocumentError> for CliError {
    fn from(e: DocumentError) -> Self {
        CliError::Input(e.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Library(e)
    }
}

pub fn condition_name(c: WitnessCondition) -> &'static str {
    match c {
        WitnessCondition::NonTrivialNegative => "non_trivial_negative",
        WitnessCondition::NoSeparableInNegative => "no_separable_in_negative",
        WitnessCondition::NegativeInsideProductSubspace => "negative_inside_product_subspace",
    }
}
