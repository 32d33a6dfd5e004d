//! Trace CSV emission and parsing, plus the summary document.
//!
//! Format contract: header
//! `k,sensor,z,z_pred,s,nis,avg_nis,ci_lo,ci_hi,delta,u_delta,event`,
//! floats printed with 12 significant digits, event one of
//! ``/`td`/`reset`/`warmup`, LF line endings. Rows are sorted by
//! `(sensor, k)`. Re-running with the same seed produces a byte-identical
//! file.

use crate::{CliError, Result};
use sakf_core::{summarize, RunOutput};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const CSV_HEADER: &str = "k,sensor,z,z_pred,s,nis,avg_nis,ci_lo,ci_hi,delta,u_delta,event";

/// Names of the numeric columns, in file order.
pub const NUMERIC_COLUMNS: [&str; 9] = [
    "z", "z_pred", "s", "nis", "avg_nis", "ci_lo", "ci_hi", "delta", "u_delta",
];

/// Formats with `sig` significant digits, shortest form: plain decimal in
/// a moderate exponent range, scientific otherwise, trailing zeros
/// trimmed.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= sig as i32 {
        let s = format!("{:.*e}", sig - 1, x);
        match s.split_once('e') {
            Some((mantissa, exponent)) => {
                let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
                format!("{mantissa}e{exponent}")
            }
            None => s,
        }
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

fn fmt(x: f64) -> String {
    format_sig(x, 12)
}

/// Renders the full trace as CSV text.
pub fn csv_text(out: &RunOutput) -> String {
    let mut text = String::with_capacity(64 * 1024);
    text.push_str(CSV_HEADER);
    text.push('\n');
    for trace in &out.sensors {
        for row in &trace.rows {
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                row.k,
                trace.sensor,
                fmt(row.z),
                fmt(row.z_pred),
                fmt(row.s),
                fmt(row.nis),
                fmt(row.avg_nis),
                fmt(row.ci_lo),
                fmt(row.ci_hi),
                fmt(row.delta),
                fmt(row.u_delta),
                row.event.label(),
            ));
        }
    }
    text
}

pub fn write_csv(out: &RunOutput, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(csv_text(out).as_bytes())
        .map_err(|e| CliError::io(path, e))
}

/// Writes `summary.json` with the per-sensor statistics.
pub fn write_summary(out: &RunOutput, path: &Path) -> Result<()> {
    let summary = summarize(out);
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Runtime(format!("summary serialization: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// Parsed-back trace: per sensor, the step axis and each numeric column.
#[derive(Debug, Clone)]
pub struct SensorSeries {
    pub sensor: usize,
    pub k: Vec<f64>,
    pub columns: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct TraceData {
    pub sensors: Vec<SensorSeries>,
}

/// Reads a trace CSV produced by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<TraceData> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(&text).map_err(|msg| CliError::Config(format!("{}: {msg}", path.display())))
}

fn parse_csv(text: &str) -> std::result::Result<TraceData, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty trace file")?;
    if header != CSV_HEADER {
        return Err(format!("unexpected header: {header}"));
    }
    let mut by_sensor: BTreeMap<usize, SensorSeries> = BTreeMap::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(format!("line {}: expected 12 fields", lineno + 2));
        }
        let k: f64 = fields[0]
            .parse()
            .map_err(|_| format!("line {}: bad step index", lineno + 2))?;
        let sensor: usize = fields[1]
            .parse()
            .map_err(|_| format!("line {}: bad sensor index", lineno + 2))?;
        let series = by_sensor.entry(sensor).or_insert_with(|| SensorSeries {
            sensor,
            k: Vec::new(),
            columns: NUMERIC_COLUMNS
                .iter()
                .map(|c| (c.to_string(), Vec::new()))
                .collect(),
        });
        series.k.push(k);
        for (i, name) in NUMERIC_COLUMNS.iter().enumerate() {
            let value: f64 = fields[2 + i]
                .parse()
                .map_err(|_| format!("line {}: bad value in column {name}", lineno + 2))?;
            series
                .columns
                .get_mut(*name)
                .expect("column exists")
                .push(value);
        }
    }
    Ok(TraceData {
        sensors: by_sensor.into_values().collect(),
    })
}
