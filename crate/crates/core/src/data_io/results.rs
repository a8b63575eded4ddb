use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{sort_rows, CheckpointRow, ResultRow};

pub const RESULT_HEADER: [&str; 8] = [
    "case",
    "method",
    "K",
    "replica",
    "error",
    "wall_seconds",
    "acceptance_rate",
    "seed",
];

const SIGNIFICANT: usize = 10;

/// Decimal rendering with `digits` significant digits and no exponent.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i64 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits_str: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let body = if exp >= 0 {
        let int_len = exp as usize + 1;
        if int_len >= digits_str.len() {
            format!("{digits_str}{}", "0".repeat(int_len - digits_str.len()))
        } else {
            format!("{}.{}", &digits_str[..int_len], &digits_str[int_len..])
        }
    } else {
        format!("0.{}{digits_str}", "0".repeat((-exp - 1) as usize))
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn num(v: f64) -> String {
    format_significant(v, SIGNIFICANT)
}

/// Writes the sorted result table. `wall_seconds` is left empty unless
/// `include_timing` is set, so reruns with one seed are byte-identical.
pub fn write_results(rows: &[ResultRow], path: &Path, include_timing: bool) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::validation("rows", "nothing to write"));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_results_to(rows, file, include_timing).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// [`write_results`] into any writer.
pub fn write_results_to<W: Write>(rows: &[ResultRow], out: W, include_timing: bool) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::validation("rows", "nothing to write"));
    }
    let mut sorted = rows.to_vec();
    sort_rows(&mut sorted);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER).map_err(csv_error)?;
    for r in &sorted {
        if !(r.error >= 0.0) {
            return Err(Error::validation("error", format!("negative or NaN error in {}", r.method)));
        }
        let timing = if include_timing { num(r.wall_seconds) } else { String::new() };
        w.write_record([
            r.case.clone(),
            r.method.clone(),
            r.k.to_string(),
            r.replica.to_string(),
            num(r.error),
            timing,
            r.acceptance_rate.map(num).unwrap_or_default(),
            r.seed.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

/// Test-error checkpoints, one line per refresh.
pub fn write_checkpoints(rows: &[CheckpointRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let located = |e: csv::Error| match csv_error(e) {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    };
    w.write_record(["method", "K", "replica", "iteration", "elapsed_seconds", "error"])
        .map_err(located)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.k.to_string(),
            r.replica.to_string(),
            r.iteration.to_string(),
            num(r.elapsed_seconds),
            num(r.error),
        ])
        .map_err(located)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(e: csv::Error) -> Error {
    if !e.is_io_error() {
        return Error::Csv(e);
    }
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<output>", io),
        _ => unreachable!("checked above"),
    }
}
