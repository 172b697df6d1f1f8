//! Report envelope and CSV writers.
//!
//! Report bodies are deterministic for identical inputs; the only varying
//! field is the `timing` block, which consumers should strip before
//! byte-comparing reports.

use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<I: Serialize, B: Serialize> {
    pub tool_version: &'static str,
    pub kind: &'static str,
    pub input: I,
    #[serde(flatten)]
    pub body: B,
    pub timing: Timing,
}

pub fn emit_report<I: Serialize, B: Serialize>(
    kind: &'static str,
    input: I,
    body: B,
    wall_ms: f64,
) {
    let report = Report {
        tool_version: TOOL_VERSION,
        kind,
        input,
        body,
        timing: Timing { wall_ms },
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable report")
    );
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub tool_version: &'static str,
    pub error: String,
    pub exit_code: i32,
}

pub fn emit_error(error: &str, exit_code: i32) {
    let report = ErrorReport {
        tool_version: TOOL_VERSION,
        error: error.to_string(),
        exit_code,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable error")
    );
    eprintln!("error: {error}");
}

/// Minimal CSV escaping: quotes fields containing separators or quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_line(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",")
}
