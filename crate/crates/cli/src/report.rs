use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn failed(name: impl Into<String>, err: impl ToString) -> Self {
        Check::new(name, false).with_detail(err.to_string())
    }
}

/// Rows for CSV output, header first.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// What a command produced, before serialization.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub errors: Vec<String>,
    pub result: Value,
    pub table: Table,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    seed: u64,
    passed: bool,
    checks: &'a [Check],
    errors: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_clock_ms: Option<u64>,
    #[serde(flatten)]
    result: &'a Value,
}

pub const TOOL: &str = "arbor";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Serializes an outcome. `wall_clock_ms` is only embedded on request,
/// since it breaks byte-for-byte reproducibility.
pub fn render(cfg: &RunConfig, outcome: &Outcome, wall_clock_ms: Option<u64>) -> Result<Vec<u8>, CliError> {
    match cfg.format {
        Format::Json => {
            let empty = Value::Object(Default::default());
            let result = match &outcome.result {
                Value::Object(_) => &outcome.result,
                _ => &empty,
            };
            let env = Envelope {
                tool: TOOL,
                version: VERSION,
                config: cfg,
                seed: cfg.seed,
                passed: outcome.passed(),
                checks: &outcome.checks,
                errors: &outcome.errors,
                wall_clock_ms,
                result,
            };
            let mut bytes = serde_json::to_vec_pretty(&env)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::CRLF)
                .from_writer(Vec::new());
            w.write_record(&outcome.table.header)?;
            for row in &outcome.table.rows {
                w.write_record(row)?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.into_error()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_args;

    fn outcome() -> Outcome {
        Outcome {
            checks: vec![Check::new("a", true), Check::new("b", false).with_detail("why")],
            errors: Vec::new(),
            result: serde_json::json!({"x": 1}),
            table: Table {
                header: vec!["k", "v"],
                rows: vec![vec!["one".into(), "has,comma".into()]],
            },
        }
    }

    #[test]
    fn json_envelope() {
        let cfg = parse_args(["arbor", "--seed", "4", "odometer", "--r", "4", "--s", "2"]).unwrap();
        let out = outcome();
        assert!(!out.passed());
        assert_eq!(out.failures().count(), 1);
        let v: Value = serde_json::from_slice(&render(&cfg, &out, None).unwrap()).unwrap();
        assert_eq!(v["seed"], 4);
        assert_eq!(v["passed"], false);
        assert_eq!(v["x"], 1);
        assert_eq!(v["checks"][1]["detail"], "why");
        assert!(v.get("wall_clock_ms").is_none());
        let timed: Value = serde_json::from_slice(&render(&cfg, &out, Some(12)).unwrap()).unwrap();
        assert_eq!(timed["wall_clock_ms"], 12);
    }

    #[test]
    fn csv_quotes_and_crlf() {
        let cfg = parse_args(["arbor", "--format", "csv", "odometer", "--r", "4", "--s", "2"]).unwrap();
        let text = String::from_utf8(render(&cfg, &outcome(), None).unwrap()).unwrap();
        assert_eq!(text, "k,v\r\none,\"has,comma\"\r\n");
    }
}
