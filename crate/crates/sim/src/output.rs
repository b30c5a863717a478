//! CSV and JSON serialization of sweep results.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::Scheme;
use crate::error::{SimError, SimResult};
use crate::sweep::{Row, Summary, SweepResult};

pub const CSV_HEADER: [&str; 15] = [
    "scheme",
    "sweep_value_db",
    "q_bar",
    "realization",
    "seed",
    "alpha",
    "rho",
    "sum_rate",
    "rate_a",
    "rate_b",
    "q_harvest",
    "p_relay",
    "iterations",
    "converged",
    "infeasible",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// JSON for a `.json` extension (any case), CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

/// Formats `x` with 10 significant digits in the style of C's `%.10g`:
/// trailing zeros dropped, exponent form outside `1e-4 <= |x| < 1e10`.
/// Non-finite values print as `NaN`, `inf` and `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..10).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (9 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn row_record(r: &Row) -> [String; 15] {
    [
        r.scheme.as_str().to_string(),
        format_float(r.sweep_value_db),
        format_float(r.q_bar),
        r.realization.to_string(),
        r.seed.to_string(),
        format_float(r.alpha),
        format_float(r.rho),
        format_float(r.sum_rate),
        format_float(r.rate_a),
        format_float(r.rate_b),
        format_float(r.q_harvest),
        format_float(r.p_relay),
        r.iterations.to_string(),
        r.converged.to_string(),
        r.infeasible.to_string(),
    ]
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> SimResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        w.write_record(row_record(r))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    rows: &'a [Row],
    summary: Vec<Summary>,
}

/// Rows plus per-cell summaries. Non-finite numbers become `null`.
pub fn write_json<W: Write>(result: &SweepResult, out: W) -> SimResult<()> {
    let doc = JsonDocument {
        rows: &result.rows,
        summary: result.summary(),
    };
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out).map_err(serde_json::Error::io)?;
    Ok(())
}

/// Writes `result` to `path` in the given format.
pub fn emit(result: &SweepResult, format: OutputFormat, path: &Path) -> SimResult<()> {
    let io_err = |source| SimError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(result, &mut w)?,
        OutputFormat::Json => write_json(result, &mut w)?,
    }
    w.flush().map_err(io_err)
}

/// Reads a table produced by [`write_csv`].
pub fn parse_csv<R: Read>(input: R) -> SimResult<SweepResult> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(SimError::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let bad = |i: usize| SimError::Parse(format!("row {}: bad {} {:?}", line + 1, CSV_HEADER[i], field(i)));
        let float = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
        let flag = |i: usize| field(i).parse::<bool>().map_err(|_| bad(i));
        rows.push(Row {
            scheme: field(0).parse::<Scheme>().map_err(|_| bad(0))?,
            sweep_value_db: float(1)?,
            q_bar: float(2)?,
            realization: int(3)? as usize,
            seed: int(4)?,
            alpha: float(5)?,
            rho: float(6)?,
            sum_rate: float(7)?,
            rate_a: float(8)?,
            rate_b: float(9)?,
            q_harvest: float(10)?,
            p_relay: float(11)?,
            iterations: int(12)? as usize,
            converged: flag(13)?,
            infeasible: flag(14)?,
        });
    }
    Ok(SweepResult { rows })
}
