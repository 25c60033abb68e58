use std::process::ExitCode;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of a command that ran to completion.
pub struct Report {
    pub config: Value,
    pub result: Value,
    pub text: String,
    /// Set when a gate, check or verdict failed; the report is still printed.
    pub failed: Option<String>,
}

impl Report {
    pub fn new(
        config: impl Serialize,
        result: impl Serialize,
        text: String,
    ) -> Result<Self, Failure> {
        Ok(Report {
            config: serde_json::to_value(config).map_err(Failure::internal)?,
            result: serde_json::to_value(result).map_err(Failure::internal)?,
            text,
            failed: None,
        })
    }

    pub fn fail_if(mut self, cond: bool, msg: impl Into<String>) -> Self {
        if cond {
            self.failed = Some(msg.into());
        }
        self
    }

    pub fn emit(self, command: &str, globals: &Value, json: bool) -> ExitCode {
        let mut config = Map::new();
        if let Value::Object(g) = globals {
            config.extend(g.clone());
        }
        if let Value::Object(c) = self.config {
            config.extend(c);
        }
        if json {
            let doc = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "command": command,
                "config": config,
                "ok": self.failed.is_none(),
                "failure": self.failed,
                "result": self.result,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializable")
            );
        } else {
            println!("# coulomb-mot {command} schema_version={SCHEMA_VERSION}");
            for (k, v) in &config {
                println!("# {k}={}", scalar(v));
            }
            print!("{}", self.text);
        }
        match self.failed {
            None => ExitCode::SUCCESS,
            Some(msg) => {
                eprintln!("failed: {msg}");
                ExitCode::from(1)
            }
        }
    }
}

pub fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

/// A command that could not run: exit code 2 for input errors, 1 for mathematical failures.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: msg.into(),
        }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }

    pub fn emit(self, command: &str, json: bool) -> ExitCode {
        if json {
            let doc = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "command": command,
                "ok": false,
                "error": { "code": self.code, "message": self.message },
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializable")
            );
        }
        eprintln!("error: {}", self.message);
        ExitCode::from(self.code)
    }
}

impl From<coulomb_mot::Error> for Failure {
    fn from(e: coulomb_mot::Error) -> Self {
        Failure {
            code: if e.is_input_error() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

/// Shortest round-trip decimal; deterministic across runs.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite")
    } else {
        format!("{x}")
    }
}

pub fn csv_line(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}
