//! JSON and long-format CSV rendering of reports.

use crofton_core::json;
use serde_json::Value;

use crate::config::Format;
use crate::CliError;

pub fn render(report: &Value, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => json::to_string(report).map_err(|e| CliError::runtime(e.to_string())),
        Format::Csv => {
            let mut rows = vec!["field,value".to_string()];
            flatten("", report, &mut rows);
            Ok(rows.join("\n"))
        }
    }
}

/// One `field,value` row per leaf; nested keys are joined with `.` and array
/// entries get `[i]`.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, rows);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, rows);
            }
        }
        leaf => rows.push(format!("{prefix},{}", scalar(leaf))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => json::format_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
