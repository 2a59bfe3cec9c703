//! Report rendering as JSON, CSV or aligned text.

use std::io::Write;

use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

/// A command's result, ready to print in any format.
pub struct Report {
    /// A JSON object.
    pub json: Value,
    /// Table rows for CSV, when the command is naturally tabular. Otherwise
    /// CSV is one row of the flattened JSON object.
    pub rows: Option<Vec<Value>>,
    /// Text for `--format human`.
    pub human: Vec<String>,
    /// `Some(reason)` when a checked inequality failed.
    pub violation: Option<String>,
}

/// Flattens nested objects and arrays into dotted keys (`ensembles.0.success`).
pub fn flatten(value: &Value) -> Map<String, Value> {
    fn walk(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(&key(k), x, out)),
            Value::Array(a) => a
                .iter()
                .enumerate()
                .for_each(|(i, x)| walk(&key(&i.to_string()), x, out)),
            _ => {
                out.insert(prefix.to_string(), v.clone());
            }
        }
    }
    let mut out = Map::new();
    walk("", value, &mut out);
    out
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn write_csv(report: &Report, out: &mut dyn Write) -> CliResult<()> {
    let rows: Vec<Map<String, Value>> = match &report.rows {
        Some(rows) => rows.iter().map(flatten).collect(),
        None => vec![flatten(&report.json)],
    };
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        w.write_record(first.keys())?;
        for row in &rows {
            w.write_record(row.values().map(cell))?;
        }
    }
    w.flush().map_err(CliError::Output)?;
    Ok(())
}

pub fn render(report: &Report, format: Format, out: &mut dyn Write) -> CliResult<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report.json)?;
            writeln!(out).map_err(CliError::Output)?;
        }
        Format::Csv => write_csv(report, out)?,
        Format::Human => {
            for line in &report.human {
                writeln!(out, "{line}").map_err(CliError::Output)?;
            }
        }
    }
    Ok(())
}

/// `label  value` lines padded to a common width.
pub fn aligned(pairs: &[(String, String)]) -> Vec<String> {
    let width = pairs
        .iter()
        .map(|(k, _)| k.chars().count())
        .max()
        .unwrap_or(0);
    pairs
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flatten_uses_dotted_paths() {
        let v = json!({"a": 1, "b": {"c": [true, null]}});
        let f = flatten(&v);
        let keys: Vec<&str> = f.keys().map(String::as_str).collect();
        assert_eq!(keys, ["a", "b.c.0", "b.c.1"]);
    }

    #[test]
    fn csv_header_matches_keys() {
        let report = Report {
            json: json!({"n": 1, "mode": "x", "theta": null}),
            rows: None,
            human: vec![],
            violation: None,
        };
        let mut buf = Vec::new();
        render(&report, Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,mode,theta\n1,x,\n");
    }
}
