//! Two-column CSV files of timestamped energy or power values.
//!
//! Input rows are `timestamp,value` with an optional header. Timestamps are
//! ISO-8601 without offset (`T` or space separator, seconds optional). A
//! missing value is an empty field or `NaN`. Output uses the same shape with
//! a header and second-resolution timestamps.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;
use cpi_core::{EnergySeries, MeterKind, PowerSeries, Resolution};

const TIMESTAMP_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];
const OUTPUT_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty file")]
    Empty,
    #[error("need at least two rows to infer the resolution")]
    SingleRow,
    #[error("row {row}: expected 2 columns, found {found}")]
    Columns { row: usize, found: usize },
    #[error("row {row}: invalid timestamp {value:?}")]
    Timestamp { row: usize, value: String },
    #[error("row {row}: invalid value {value:?}")]
    Value { row: usize, value: String },
    #[error("irregular spacing at row {row}")]
    IrregularSpacing { row: usize },
    #[error(transparent)]
    Series(#[from] cpi_core::Error),
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;

/// Regularly spaced values as read from a file, before interpretation as
/// energy or power.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSeries {
    pub start: NaiveDateTime,
    pub resolution: Resolution,
    pub values: Vec<Option<f64>>,
}

impl ParsedSeries {
    pub fn into_energy(self, kind: MeterKind) -> Result<EnergySeries> {
        Ok(EnergySeries::new(self.start, self.resolution, self.values, kind)?)
    }

    pub fn into_power(self) -> Result<PowerSeries> {
        Ok(PowerSeries::new(self.start, self.resolution, self.values)?)
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

fn parse_value(s: &str) -> Option<Option<f64>> {
    if s.is_empty() || s.eq_ignore_ascii_case("nan") {
        return Some(None);
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
}

/// Parses CSV text. Row numbers in errors count data rows from 1.
pub fn parse_series(text: &str) -> Result<ParsedSeries> {
    parse_reader(text.as_bytes())
}

pub fn parse_reader<R: Read>(reader: R) -> Result<ParsedSeries> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut stamps: Vec<NaiveDateTime> = Vec::new();
    let mut values = Vec::new();
    let mut row = 0;
    for record in csv.records() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let first = record.get(0).unwrap_or("");
        let is_header = row == 0
            && parse_timestamp(first).is_none()
            && record.get(1).is_some_and(|v| parse_value(v).is_none());
        if is_header {
            continue;
        }
        row += 1;
        if record.len() != 2 {
            return Err(IoError::Columns { row, found: record.len() });
        }
        let ts = parse_timestamp(first).ok_or_else(|| IoError::Timestamp {
            row,
            value: first.to_owned(),
        })?;
        let raw = &record[1];
        let v = parse_value(raw).ok_or_else(|| IoError::Value {
            row,
            value: raw.to_owned(),
        })?;
        stamps.push(ts);
        values.push(v);
    }

    match stamps.len() {
        0 => return Err(IoError::Empty),
        1 => return Err(IoError::SingleRow),
        _ => {}
    }
    let step = stamps[1] - stamps[0];
    if step <= chrono::TimeDelta::zero() {
        return Err(IoError::IrregularSpacing { row: 2 });
    }
    if let Some(i) = stamps.windows(2).position(|w| w[1] - w[0] != step) {
        return Err(IoError::IrregularSpacing { row: i + 2 });
    }
    Ok(ParsedSeries {
        start: stamps[0],
        resolution: Resolution::new(step)?,
        values,
    })
}

pub fn read_series(path: &Path) -> Result<ParsedSeries> {
    let file = File::open(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    parse_reader(std::io::BufReader::new(file))
}

/// Writes `timestamp,value` rows; missing values become empty fields.
pub fn write_values<W: Write>(
    writer: W,
    start: NaiveDateTime,
    resolution: Resolution,
    values: &[Option<f64>],
) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["timestamp", "value"])?;
    let step = resolution.duration();
    let mut ts = start;
    for v in values {
        let value = v.map(|x| x.to_string()).unwrap_or_default();
        csv.write_record([ts.format(OUTPUT_FORMAT).to_string(), value])?;
        ts += step;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_energy<W: Write>(writer: W, es: &EnergySeries) -> Result<()> {
    write_values(writer, es.start(), es.resolution(), es.values())
}

pub fn write_power<W: Write>(writer: W, ps: &PowerSeries) -> Result<()> {
    write_values(writer, ps.start(), ps.resolution(), ps.values())
}

pub fn create(path: &Path) -> Result<std::io::BufWriter<File>> {
    File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })
}
