//! File formats: observation CSV input, experiment records, summaries and
//! curve tables.
//!
//! Floating-point fields are written in scientific notation with 17
//! significant digits so that values survive a write/read round trip.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::analysis::{BiasSummary, PairedTestResult, Param};
use crate::curves::CurvePoint;
use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::experiment::{ExperimentRecord, TimingSummary};
use crate::model::Sample;

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_f64(*v))
}

pub(crate) fn de_f64<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    <f64 as serde::Deserialize>::deserialize(d)
}

fn ser_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&format_f64(*v)),
        None => s.serialize_str(""),
    }
}

/// Reads observations: one positive number per line, an optional `x`
/// header on the first non-blank line, blank lines ignored. Row numbers in
/// errors are 1-based line numbers.
pub fn parse_observations<R: Read>(reader: R) -> Result<Sample> {
    let mut values = Vec::new();
    let mut seen_content = false;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let row = i + 1;
        let line = line?;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        if !seen_content {
            seen_content = true;
            if field == "x" {
                continue;
            }
        }
        let v: f64 = field.parse().map_err(|_| Error::InvalidRow {
            row,
            message: format!("'{field}' is not a number"),
        })?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidRow {
                row,
                message: format!("{field} is not a finite positive value"),
            });
        }
        values.push(v);
    }
    Sample::new(values)
}

pub fn read_observations(path: &Path) -> Result<Sample> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_observations(f)
}

pub fn write_observations<W: Write>(mut w: W, s: &Sample) -> Result<()> {
    writeln!(w, "x")?;
    for v in s.values() {
        writeln!(w, "{}", format_f64(*v))?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes `records` as CSV. `comment` lines, if any, are prefixed with `#`
/// and placed before the header.
pub fn write_records<W: Write>(
    mut w: W,
    records: &[ExperimentRecord],
    comment: Option<&str>,
) -> Result<()> {
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    let mut csv = csv::Writer::from_writer(w);
    for r in records {
        csv.serialize(r)?;
    }
    if records.is_empty() {
        csv.write_record(RECORD_COLUMNS)?;
    }
    csv.flush()?;
    Ok(())
}

const RECORD_COLUMNS: [&str; 12] = [
    "method",
    "n",
    "replication_index",
    "seed",
    "true_shape",
    "true_scale",
    "est_shape",
    "est_scale",
    "kl",
    "iterations",
    "converged",
    "wall_time_seconds",
];

pub fn write_records_file(
    path: &Path,
    records: &[ExperimentRecord],
    comment: Option<&str>,
) -> Result<()> {
    write_records(create(path)?, records, comment)
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<ExperimentRecord>> {
    let mut csv = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    csv.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn read_records_file(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_records(f)
}

/// One row of `summary.csv`. The `kind` column says which of the optional
/// columns are populated.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub kind: &'static str,
    pub method: Method,
    pub method_b: Option<Method>,
    pub n: usize,
    pub param: Option<Param>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub mean_bias: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub sd_bias: Option<f64>,
    pub replications: Option<usize>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub t_statistic: Option<f64>,
    pub degrees_of_freedom: Option<usize>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub p_value: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub median_iterations: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub median_wall_time_seconds: Option<f64>,
}

impl SummaryRow {
    fn empty(kind: &'static str, method: Method, n: usize) -> Self {
        Self {
            kind,
            method,
            method_b: None,
            n,
            param: None,
            mean_bias: None,
            sd_bias: None,
            replications: None,
            t_statistic: None,
            degrees_of_freedom: None,
            p_value: None,
            median_iterations: None,
            median_wall_time_seconds: None,
        }
    }
}

impl From<&BiasSummary> for SummaryRow {
    fn from(b: &BiasSummary) -> Self {
        Self {
            param: Some(b.param),
            mean_bias: Some(b.mean_bias),
            sd_bias: Some(b.sd_bias),
            replications: Some(b.replications),
            ..Self::empty("bias", b.method, b.n)
        }
    }
}

impl From<&PairedTestResult> for SummaryRow {
    fn from(t: &PairedTestResult) -> Self {
        Self {
            method_b: Some(t.method_b),
            t_statistic: Some(t.t_statistic),
            degrees_of_freedom: Some(t.degrees_of_freedom),
            p_value: Some(t.p_value),
            replications: Some(t.degrees_of_freedom + 1),
            ..Self::empty("paired_t", t.method_a, t.n)
        }
    }
}

impl From<&TimingSummary> for SummaryRow {
    fn from(t: &TimingSummary) -> Self {
        Self {
            replications: Some(t.replications),
            median_iterations: Some(t.median_iterations),
            median_wall_time_seconds: Some(t.median_wall_time_seconds),
            ..Self::empty("timing", t.method, t.n)
        }
    }
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_summary_file(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_summary(create(path)?, rows)
}

pub fn write_curves<W: Write>(w: W, points: &[CurvePoint]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for p in points {
        csv.serialize(p)?;
    }
    csv.flush()?;
    Ok(())
}
