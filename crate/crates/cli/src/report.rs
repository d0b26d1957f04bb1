//! Output envelopes: one JSON object, or a CSV table.

use serde::Serialize;
use serde_json::{Map, Value};

use condlab::random_lab::ExperimentSummary;

use crate::io::format_f64;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportEnvelope {
    pub command: String,
    pub inputs: Value,
    pub payload: Value,
    pub tool_version: &'static str,
}

/// What a command produced, before formatting.
pub enum Output {
    /// Rendered as a `field,value` table in CSV.
    Report(Value),
    /// Rendered as the matrix itself in CSV.
    Matrix(Value, condlab::Matrix),
    /// Rendered as a single column in CSV.
    Vector(Value, Vec<f64>),
    Experiment(ExperimentSummary),
}

impl Output {
    pub fn payload(&self) -> Value {
        match self {
            Output::Report(v) | Output::Matrix(v, _) | Output::Vector(v, _) => v.clone(),
            Output::Experiment(s) => serde_json::to_value(s).expect("summary serializes"),
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            Output::Report(v) => {
                let mut rows = Vec::new();
                flatten("", v, &mut rows);
                let mut out = String::from("field,value\n");
                for (k, v) in rows {
                    out.push_str(&format!("{k},{v}\n"));
                }
                out
            }
            Output::Matrix(_, m) => crate::io::matrix_to_csv(m),
            Output::Vector(_, v) => v.iter().map(|x| format_f64(*x) + "\n").collect(),
            Output::Experiment(s) => experiment_csv(s),
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => n
            .as_f64()
            .filter(|_| n.is_f64())
            .map_or(n.to_string(), format_f64),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

const EXPERIMENT_COLUMNS: [&str; 16] = [
    "n",
    "trials",
    "sampleMean",
    "sampleStdError",
    "min",
    "max",
    "q05",
    "q50",
    "q95",
    "prediction",
    "verdict",
    "statedBound",
    "exceedsStatedBound",
    "pointwiseViolations",
    "centeredMean",
    "statistic",
];

/// One row per size.
fn experiment_csv(s: &ExperimentSummary) -> String {
    let mut out = EXPERIMENT_COLUMNS.join(",");
    out.push('\n');
    for size in &s.per_size {
        let mut row: Map<String, Value> = match serde_json::to_value(size).expect("serializes") {
            Value::Object(m) => m,
            _ => unreachable!("size summary is an object"),
        };
        row.insert("trials".into(), s.trials.into());
        row.insert("statistic".into(), s.statistic.as_str().into());
        let cells: Vec<String> = EXPERIMENT_COLUMNS
            .iter()
            .map(|c| row.get(*c).map(scalar).unwrap_or_default())
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
