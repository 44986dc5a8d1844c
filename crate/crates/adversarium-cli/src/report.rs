//! Report assembly, output formats and categorized exit codes.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

/// Error category, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Infeasible(String),
    Budget(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Parse(m) => ("parse error", m),
            CliError::Infeasible(m) => ("infeasible", m),
            CliError::Budget(m) => ("budget exceeded", m),
            CliError::Other(m) => ("error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn parse_err(e: impl fmt::Display) -> CliError {
    CliError::Parse(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A command's result. Keys are kept sorted so output is byte-stable.
pub struct Report {
    pub command: String,
    pub fields: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.to_string(), fields: Map::new() }
    }

    pub fn set(&mut self, key: &str, value: impl serde::Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.fields.insert(key.to_string(), v);
        self
    }

    fn document(&self, tol: f64, seed: u64) -> Value {
        let mut meta = Map::new();
        meta.insert("command".into(), Value::from(self.command.clone()));
        meta.insert("seed".into(), Value::from(seed));
        meta.insert("tolerance".into(), Value::from(tol));
        meta.insert("version".into(), Value::from(adversarium::VERSION));
        let mut doc = Map::new();
        doc.insert("meta".into(), Value::Object(meta));
        doc.insert("result".into(), Value::Object(self.fields.clone()));
        Value::Object(doc)
    }

    pub fn render(&self, format: Format, tol: f64, seed: u64) -> CliResult<String> {
        let doc = self.document(tol, seed);
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&doc).expect("json") + "\n"),
            Format::Csv => {
                let mut rows = vec![];
                flatten("", &doc, &mut rows);
                let mut w = csv::Writer::from_writer(vec![]);
                w.write_record(["field", "i", "j", "value"]).map_err(|e| CliError::Other(e.to_string()))?;
                for r in rows {
                    w.write_record(&r).map_err(|e| CliError::Other(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv is utf-8"))
            }
        }
    }

    pub fn emit(&self, format: Format, tol: f64, seed: u64, out: Option<&Path>) -> CliResult<()> {
        let text = self.render(format, tol, seed)?;
        match out {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::Other(format!("{}: {e}", p.display()))),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Other(e.to_string())),
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

// Rows of `field,i,j,value`: vectors fill `i`, matrices fill `i,j` row-major.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<[String; 4]>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(prefix, k), x, out);
            }
        }
        Value::Array(items) => {
            let is_matrix = !items.is_empty()
                && items.iter().all(|r| matches!(r, Value::Array(c) if c.iter().all(|x| scalar(x).is_some())));
            if is_matrix {
                for (i, r) in items.iter().enumerate() {
                    for (j, x) in r.as_array().expect("row").iter().enumerate() {
                        out.push([prefix.to_string(), i.to_string(), j.to_string(), scalar(x).unwrap()]);
                    }
                }
            } else if items.iter().all(|x| scalar(x).is_some()) {
                for (i, x) in items.iter().enumerate() {
                    out.push([prefix.to_string(), i.to_string(), String::new(), scalar(x).unwrap()]);
                }
            } else {
                for (i, x) in items.iter().enumerate() {
                    flatten(&join(prefix, &i.to_string()), x, out);
                }
            }
        }
        _ => out.push([prefix.to_string(), String::new(), String::new(), scalar(v).unwrap()]),
    }
}
