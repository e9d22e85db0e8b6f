//! Report envelopes, input hashing and error mapping.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use quantarrow::Error;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Validation(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
            _ => EXIT_VALIDATION,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Core(e) => (core_kind(e), e.to_string()),
            CliError::Validation(m) => ("validation", m.clone()),
        };
        let mut body = json!({ "kind": kind, "message": message, "exit_code": self.exit_code() });
        if let CliError::Core(Error::BudgetExceeded { required, budget }) = self {
            body["required"] = json!(required.to_string());
            body["budget"] = json!(budget);
        }
        json!({ "error": body })
    }
}

fn core_kind(e: &Error) -> &'static str {
    match e {
        Error::IdenticalAlternatives(_) => "identical_alternatives",
        Error::AlternativeOutOfRange { .. } => "alternative_out_of_range",
        Error::InvalidRanking(_) => "invalid_ranking",
        Error::InvalidDistribution(_) => "invalid_distribution",
        Error::ShapeMismatch(_) => "shape_mismatch",
        Error::DegeneratePairs => "degenerate_pairs",
        Error::TooManyVariables { .. } => "too_many_variables",
        Error::InvalidTable(_) => "invalid_table",
        Error::BudgetExceeded { .. } => "budget_exceeded",
        Error::UnsupportedK { .. } => "unsupported_k",
        Error::AsymmetricDistribution => "asymmetric_distribution",
        Error::TooFewAlternatives(_) => "too_few_alternatives",
        Error::NotTransitive { .. } => "not_transitive",
        Error::SameVoter(_) => "same_voter",
        Error::InvalidWitness(_) => "invalid_witness",
        Error::ConstructionFailed(_) => "construction_failed",
        Error::InvalidCorrelation { .. } => "invalid_correlation",
        Error::HypothesisFailed { .. } => "hypothesis_failed",
        Error::TooFewSamples { .. } => "too_few_samples",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Format(_) => "format",
        Error::Json(_) => "json",
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// An input file with its SHA-256.
#[derive(Clone, Debug, Serialize)]
pub struct Input {
    pub path: String,
    pub sha256: String,
    #[serde(skip)]
    pub text: String,
}

pub fn read_input(path: &Path) -> CliResult<Input> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let sha256 = Sha256::digest(&bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    });
    let text = String::from_utf8(bytes).map_err(|_| CliError::Validation(format!("{} is not UTF-8", path.display())))?;
    Ok(Input { path: path.display().to_string(), sha256, text })
}

pub struct Envelope<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub inputs: &'a [Input],
}

impl Envelope<'_> {
    pub fn wrap(&self, report: Value, float_only: bool) -> Value {
        let report = if float_only { floats_only(report) } else { report };
        json!({
            "tool": "quantarrow",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "seed": self.seed,
            "inputs": self.inputs,
            "report": report,
        })
    }

    /// Comment lines heading a CSV report.
    pub fn csv_header(&self) -> String {
        let inputs: Vec<String> = self.inputs.iter().map(|i| format!("{}:{}", i.path, i.sha256)).collect();
        format!(
            "# tool=quantarrow version={} command={} seed={} inputs=[{}]\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.seed,
            inputs.join(",")
        )
    }
}

/// Replaces every exact `{"num", "den", "float"}` object by its float.
pub fn floats_only(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let exact = map.len() == 3 && map.contains_key("num") && map.contains_key("den");
            if exact {
                if let Some(f) = map.get("float") {
                    return f.clone();
                }
            }
            Value::Object(map.into_iter().map(|(k, v)| (k, floats_only(v))).collect::<Map<_, _>>())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(floats_only).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(t: &T) -> CliResult<Value> {
    serde_json::to_value(t).map_err(|e| CliError::Core(Error::Json(e)))
}
