use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{Datelike, NaiveDate};

use super::{DataError, TimeSeries};

/// A CSV column, by header name or by zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl ColumnRef {
    /// Digits select by position, anything else by name.
    pub fn parse(s: &str) -> Self {
        match s.parse() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        }
    }

    fn resolve(&self, headers: &csv::StringRecord) -> Result<usize, DataError> {
        match self {
            ColumnRef::Index(i) if *i < headers.len() => Ok(*i),
            ColumnRef::Index(i) => Err(DataError::MissingColumn(i.to_string())),
            ColumnRef::Name(n) => headers
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| DataError::MissingColumn(n.clone())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadReport {
    pub rows: usize,
    /// Rows dropped because a field was missing or did not parse.
    pub skipped: usize,
    /// Rows dropped because their time repeats an earlier row.
    pub duplicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TimeKind {
    Real,
    Date,
}

fn parse_time(field: &str) -> Option<(TimeKind, f64)> {
    if let Ok(v) = field.parse::<f64>() {
        return v.is_finite().then_some((TimeKind::Real, v));
    }
    let d = NaiveDate::parse_from_str(field, "%Y-%m-%d").ok()?;
    Some((TimeKind::Date, d.num_days_from_ce() as f64))
}

/// Parse a header-plus-rows CSV into a scalar series.
///
/// Times are reals or ISO dates; dates become day offsets from the earliest
/// kept date. Rows whose time kind differs from the first parsed row are
/// skipped along with unparseable ones.
pub fn parse_csv<R: Read>(
    input: R,
    time_column: &ColumnRef,
    value_column: &ColumnRef,
) -> Result<(TimeSeries, LoadReport), DataError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let tc = time_column.resolve(&headers)?;
    let vc = value_column.resolve(&headers)?;

    let mut report = LoadReport::default();
    let mut kind = None;
    let mut seen = HashSet::new();
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for record in reader.records() {
        report.rows += 1;
        let Ok(record) = record else {
            report.skipped += 1;
            continue;
        };
        let parsed = record.get(tc).and_then(parse_time).zip(
            record
                .get(vc)
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite()),
        );
        let Some(((k, t), v)) = parsed else {
            report.skipped += 1;
            continue;
        };
        if *kind.get_or_insert(k) != k {
            report.skipped += 1;
            continue;
        }
        // 0.0 and -0.0 are the same time.
        if !seen.insert((t + 0.0).to_bits()) {
            report.duplicates += 1;
            continue;
        }
        rows.push((t, v));
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let origin = if kind == Some(TimeKind::Date) { rows[0].0 } else { 0.0 };
    let times = rows.iter().map(|r| r.0 - origin).collect();
    let values = rows.iter().map(|r| r.1).collect();
    Ok((TimeSeries::scalar(times, values)?, report))
}

pub fn load_csv(
    path: &Path,
    time_column: &ColumnRef,
    value_column: &ColumnRef,
) -> Result<(TimeSeries, LoadReport), DataError> {
    let file = File::open(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })?;
    parse_csv(file, time_column, value_column)
}

/// Read a `t,x` dataset file as written by [`TimeSeries::write_csv`].
pub fn read_dataset_csv<R: Read>(input: R) -> Result<(TimeSeries, LoadReport), DataError> {
    parse_csv(input, &ColumnRef::Name("t".into()), &ColumnRef::Name("x".into()))
}
