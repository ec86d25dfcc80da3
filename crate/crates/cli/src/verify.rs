//! `--verify`: parse a CSV this tool wrote and recompute a seeded 1% of
//! its rows.

use std::path::Path;

use serde_json::{json, Value};

use crate::commands::{diff_curve_row, envelope_rows, heatmap_row, TableKind};
use crate::error::CliError;
use crate::output::json_line;

/// Agreement required for recomputed exact values, relative above 1.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub kind: TableKind,
    pub rows: Vec<Vec<f64>>,
    pub meta: Option<Value>,
}

pub fn parse_csv(text: &str) -> Result<ParsedTable, CliError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::usage("empty CSV"))?;
    let kind = TableKind::from_header(header)
        .ok_or_else(|| CliError::usage(format!("unrecognized CSV header {header:?}")))?;
    let width = kind.header().len();
    let mut rows = Vec::new();
    let mut meta = None;
    for (i, line) in lines.enumerate() {
        if let Some(footer) = line.strip_prefix("# ") {
            let v: Value = serde_json::from_str(footer)
                .map_err(|e| CliError::usage(format!("footer on line {} is not JSON: {e}", i + 2)))?;
            meta = Some(v);
            continue;
        }
        if meta.is_some() {
            return Err(CliError::usage(format!("data after the footer on line {}", i + 2)));
        }
        let row = line
            .split(',')
            .map(|cell| cell.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::usage(format!("line {}: {e}", i + 2)))?;
        if row.len() != width {
            return Err(CliError::usage(format!("line {}: expected {width} fields, got {}", i + 2, row.len())));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::usage("CSV has no data rows"));
    }
    Ok(ParsedTable { kind, rows, meta })
}

/// `⌈n/100⌉` row indices at a seed-dependent offset.
pub fn sample_rows(n: usize, seed: u64) -> Vec<usize> {
    let k = n.div_ceil(100);
    let stride = n / k;
    let offset = (seed % stride as u64) as usize;
    (0..k).map(|j| j * stride + offset).collect()
}

fn recompute(t: &ParsedTable, row: &[f64]) -> Result<Vec<f64>, CliError> {
    match t.kind {
        TableKind::DiffCurve => diff_curve_row(row[0], row[1]),
        TableKind::Heatmap => heatmap_row(row[0], row[1]),
        TableKind::Envelope => {
            let c = t
                .meta
                .as_ref()
                .and_then(|m| m.get("c"))
                .and_then(Value::as_f64)
                .ok_or_else(|| CliError::usage("envelope CSV needs a footer with c"))?;
            Ok(envelope_rows(c, &[row[0]])?.remove(0))
        }
    }
}

/// Checks the file and returns a one-line JSON report.
pub fn verify_text(text: &str, seed: u64) -> Result<Value, CliError> {
    let t = parse_csv(text)?;
    for (i, row) in t.rows.iter().enumerate() {
        let consistent = match t.kind {
            TableKind::DiffCurve => row[4] == row[2] - row[3],
            TableKind::Envelope => row[4] == row[1].max(row[2]).max(row[3]),
            TableKind::Heatmap => true,
        };
        if !consistent {
            return Err(CliError::Numerical(format!("data row {} is internally inconsistent", i + 1)));
        }
    }
    let picked = sample_rows(t.rows.len(), seed);
    let mut worst = 0.0f64;
    for &i in &picked {
        let want = recompute(&t, &t.rows[i])?;
        for (j, (&got, &w)) in t.rows[i].iter().zip(&want).enumerate() {
            let err = (got - w).abs();
            // NaN counts as a mismatch
            if err.is_nan() || err > EXACT_TOL * w.abs().max(1.0) {
                return Err(CliError::Numerical(format!(
                    "data row {} column {}: file has {got:e}, recomputed {w:e}",
                    i + 1,
                    t.kind.header()[j]
                )));
            }
            worst = worst.max(err);
        }
    }
    Ok(json!({
        "kind": t.kind.name(),
        "rows": t.rows.len(),
        "checked": picked,
        "max_abs_error": worst,
        "ok": true,
        "seed": seed,
    }))
}

pub fn verify_file(path: &Path, seed: u64) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(json_line(&verify_text(&text, seed)?))
}
