//! CSV and JSON rendering. CSV files start with '#' lines echoing the inputs;
//! data rows carry no timestamps so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rendered result of one command.
pub struct Output {
    pub stem: &'static str,
    pub csv: String,
    pub json: Value,
    /// Human-readable report; `None` means the CSV doubles as the report.
    pub text: Option<String>,
}

/// JSON number, or the strings "inf"/"-inf" for infinities and null for NaN.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        Value::Null
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// CSV cell: shortest round-trip decimal, empty for missing values.
pub fn cell(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

pub fn opt_cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, cell)
}

/// Header comment: tool version plus every line of `echo`.
pub fn comment_block(title: &str, echo: &str) -> String {
    let mut s = format!("# cqed {} {title}\n", env!("CARGO_PKG_VERSION"));
    for line in echo.lines() {
        let _ = writeln!(s, "# {line}");
    }
    s
}

pub fn render_csv(comments: &str, header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Encode(e.to_string()))?;
    let body = String::from_utf8(body).map_err(|e| CliError::Encode(e.to_string()))?;
    Ok(format!("{comments}{body}"))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Write { path: path.into(), source })
}

/// Writes `<stem>.csv` and `<stem>.json` into `out`, or prints the chosen
/// format to stdout.
pub fn emit(output: &Output, format: Option<Format>, out: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(&output.json)? + "\n";
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|source| CliError::Write { path: dir.into(), source })?;
            write_file(&dir.join(format!("{}.csv", output.stem)), &output.csv)?;
            write_file(&dir.join(format!("{}.json", output.stem)), &json)?;
        }
        None => match (format, &output.text) {
            (Some(Format::Json), _) => print!("{json}"),
            (Some(Format::Csv), _) | (None, None) => print!("{}", output.csv),
            (None, Some(text)) => print!("{text}"),
        },
    }
    Ok(())
}
