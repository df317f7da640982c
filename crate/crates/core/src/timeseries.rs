//! Timestamp-indexed frames and CSV ingestion.
//!
//! A [`TimeSeriesFrame`] is an immutable table: strictly increasing UTC
//! timestamps plus named, typed columns of equal length. Missing cells are
//! `None`, never a sentinel float.
//!
//! The CSV interchange format is UTF-8, comma separated, with a header row and
//! ISO 8601 timestamps (`2023-06-01T12:00:00Z`). An empty field is a missing
//! cell.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Serialize for Timestamp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_iso8601())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Self::parse_iso8601(&text).map_err(serde::de::Error::custom)
    }
}

impl Timestamp {
    pub const fn from_epoch_seconds(secs: i64) -> Self {
        Self(secs)
    }

    pub const fn epoch_seconds(self) -> i64 {
        self.0
    }

    /// Parse ISO 8601 text. Offsets are converted to UTC; naive date-times and
    /// bare dates are taken as UTC.
    pub fn parse_iso8601(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
            return Ok(Self(dt.timestamp()));
        }
        for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
            if let Ok(dt) = NaiveDateTime::parse_from_str(text, fmt) {
                return Ok(Self(dt.and_utc().timestamp()));
            }
        }
        if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
            if let Some(dt) = d.and_hms_opt(0, 0, 0) {
                return Ok(Self(dt.and_utc().timestamp()));
            }
        }
        Err(Error::MalformedTimestamp(text.to_string()))
    }

    fn datetime(self) -> DateTime<chrono::Utc> {
        DateTime::from_timestamp(self.0, 0).expect("timestamp within chrono's range")
    }

    /// Canonical `YYYY-MM-DDTHH:MM:SSZ` rendering.
    pub fn to_iso8601(self) -> String {
        self.datetime().format("%Y-%m-%dT%H:%M:%SZ").to_string()
    }

    pub fn calendar(self) -> CalendarFeatures {
        let dt = self.datetime();
        CalendarFeatures {
            hour: dt.hour() as u8,
            day: dt.day() as u8,
            month: dt.month() as u8,
            weekday: dt.weekday().num_days_from_monday() as u8,
        }
    }

    /// Day of the year, 1-based.
    pub fn day_of_year(self) -> u32 {
        self.datetime().ordinal()
    }

    /// Fractional hour of the UTC day in `[0, 24)`.
    pub fn hour_of_day(self) -> f64 {
        self.0.rem_euclid(86_400) as f64 / 3600.0
    }

    /// Days since the epoch (floor), used to group rows by UTC day.
    pub fn day_index(self) -> i64 {
        self.0.div_euclid(86_400)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso8601())
    }
}

impl FromStr for Timestamp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_iso8601(s)
    }
}

/// Calendar fields derived from a UTC timestamp. `weekday` 0 is Monday.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalendarFeatures {
    pub hour: u8,
    pub day: u8,
    pub month: u8,
    pub weekday: u8,
}

/// Column type descriptor used by [`Schema`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous { unit: String },
    Integer,
    Categorical,
}

impl ColumnKind {
    pub fn continuous(unit: &str) -> Self {
        Self::Continuous { unit: unit.to_string() }
    }
}

/// Typed cell storage for one column.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Continuous { values: Vec<Option<f64>>, unit: String },
    Integer(Vec<Option<i64>>),
    Categorical(Vec<Option<String>>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            Self::Continuous { values, .. } => values.len(),
            Self::Integer(v) => v.len(),
            Self::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Continuous { .. } => "continuous",
            Self::Integer(_) => "integer",
            Self::Categorical(_) => "categorical",
        }
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            Self::Continuous { unit, .. } => ColumnKind::Continuous { unit: unit.clone() },
            Self::Integer(_) => ColumnKind::Integer,
            Self::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            Self::Continuous { values, .. } => values[row].is_none(),
            Self::Integer(v) => v[row].is_none(),
            Self::Categorical(v) => v[row].is_none(),
        }
    }

    /// Numeric view of the cell; categorical columns have none.
    pub fn numeric(&self, row: usize) -> Option<f64> {
        match self {
            Self::Continuous { values, .. } => values[row],
            Self::Integer(v) => v[row].map(|x| x as f64),
            Self::Categorical(_) => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, Self::Categorical(_))
    }

    fn select(&self, rows: &[usize]) -> Self {
        match self {
            Self::Continuous { values, unit } => {
                Self::Continuous { values: rows.iter().map(|&r| values[r]).collect(), unit: unit.clone() }
            }
            Self::Integer(v) => Self::Integer(rows.iter().map(|&r| v[r]).collect()),
            Self::Categorical(v) => Self::Categorical(rows.iter().map(|&r| v[r].clone()).collect()),
        }
    }

    fn missing_like(&self, len: usize) -> Self {
        match self {
            Self::Continuous { unit, .. } => Self::Continuous { values: vec![None; len], unit: unit.clone() },
            Self::Integer(_) => Self::Integer(vec![None; len]),
            Self::Categorical(_) => Self::Categorical(vec![None; len]),
        }
    }

    fn cell_text(&self, row: usize) -> String {
        match self {
            Self::Continuous { values, .. } => values[row].map(|v| v.to_string()).unwrap_or_default(),
            Self::Integer(v) => v[row].map(|v| v.to_string()).unwrap_or_default(),
            Self::Categorical(v) => v[row].clone().unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn continuous(name: &str, unit: &str, values: Vec<Option<f64>>) -> Self {
        Self { name: name.to_string(), data: ColumnData::Continuous { values, unit: unit.to_string() } }
    }

    /// Continuous column without missing cells.
    pub fn dense(name: &str, unit: &str, values: Vec<f64>) -> Self {
        Self::continuous(name, unit, values.into_iter().map(Some).collect())
    }

    pub fn integer(name: &str, values: Vec<Option<i64>>) -> Self {
        Self { name: name.to_string(), data: ColumnData::Integer(values) }
    }

    pub fn categorical(name: &str, values: Vec<Option<String>>) -> Self {
        Self { name: name.to_string(), data: ColumnData::Categorical(values) }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Immutable timestamp-indexed table.
///
/// Invariants: timestamps strictly increasing, every column has one cell per
/// timestamp, column names unique.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFrame {
    timestamps: Vec<Timestamp>,
    columns: Vec<Column>,
}

impl TimeSeriesFrame {
    pub fn new(timestamps: Vec<Timestamp>, columns: Vec<Column>) -> Result<Self> {
        if let Some(i) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            if timestamps[i] == timestamps[i + 1] {
                return Err(Error::DuplicateTimestamp(timestamps[i].to_iso8601()));
            }
            return Err(Error::UnsortedTimestamps(i + 1));
        }
        for (i, c) in columns.iter().enumerate() {
            if c.len() != timestamps.len() {
                return Err(Error::LengthMismatch {
                    column: c.name.clone(),
                    expected: timestamps.len(),
                    found: c.len(),
                });
            }
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
        }
        Ok(Self { timestamps, columns })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[Timestamp] {
        &self.timestamps
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns.iter().find(|c| c.name == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn continuous(&self, name: &str) -> Result<&[Option<f64>]> {
        match &self.column(name)?.data {
            ColumnData::Continuous { values, .. } => Ok(values),
            other => Err(kind_error(name, "continuous", other)),
        }
    }

    pub fn integer(&self, name: &str) -> Result<&[Option<i64>]> {
        match &self.column(name)?.data {
            ColumnData::Integer(values) => Ok(values),
            other => Err(kind_error(name, "integer", other)),
        }
    }

    pub fn categorical(&self, name: &str) -> Result<&[Option<String>]> {
        match &self.column(name)?.data {
            ColumnData::Categorical(values) => Ok(values),
            other => Err(kind_error(name, "categorical", other)),
        }
    }

    /// Numeric view of a continuous or integer column.
    pub fn numeric(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let col = self.column(name)?;
        if !col.data.is_numeric() {
            return Err(kind_error(name, "numeric", &col.data));
        }
        Ok((0..self.len()).map(|r| col.data.numeric(r)).collect())
    }

    /// Append a column.
    pub fn with_column(mut self, column: Column) -> Result<Self> {
        if self.has_column(&column.name) {
            return Err(Error::DuplicateColumn(column.name));
        }
        if column.len() != self.len() {
            return Err(Error::LengthMismatch { found: column.len(), column: column.name, expected: self.len() });
        }
        self.columns.push(column);
        Ok(self)
    }

    /// Replace an existing column in place, keeping its position.
    pub fn replace_column(mut self, column: Column) -> Result<Self> {
        if column.len() != self.len() {
            return Err(Error::LengthMismatch { found: column.len(), column: column.name, expected: self.len() });
        }
        let slot = self
            .columns
            .iter_mut()
            .find(|c| c.name == column.name)
            .ok_or_else(|| Error::MissingColumn(column.name.clone()))?;
        *slot = column;
        Ok(self)
    }

    pub fn drop_column(mut self, name: &str) -> Result<Self> {
        let idx =
            self.columns.iter().position(|c| c.name == name).ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        self.columns.remove(idx);
        Ok(self)
    }

    /// Keep the given rows, which must be ascending.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        Self {
            timestamps: rows.iter().map(|&r| self.timestamps[r]).collect(),
            columns: self.columns.iter().map(|c| Column { name: c.name.clone(), data: c.data.select(rows) }).collect(),
        }
    }

    /// Keep rows where `keep[row]` is true.
    pub fn filter_rows(&self, keep: &[bool]) -> Self {
        let rows: Vec<usize> = keep.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect();
        self.select_rows(&rows)
    }

    /// Rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        let rows: Vec<usize> = (start..end.min(self.len())).collect();
        self.select_rows(&rows)
    }
}

fn kind_error(name: &str, expected: &'static str, found: &ColumnData) -> Error {
    Error::ColumnKind { column: name.to_string(), expected, found: found.kind_name() }
}

/// Names the timestamp column and the typed data columns to read from CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub timestamp_column: String,
    pub columns: Vec<(String, ColumnKind)>,
}

impl Schema {
    pub fn new(timestamp_column: &str) -> Self {
        Self { timestamp_column: timestamp_column.to_string(), columns: Vec::new() }
    }

    pub fn with(mut self, name: &str, kind: ColumnKind) -> Self {
        self.columns.push((name.to_string(), kind));
        self
    }

    /// Schema that reads back exactly the columns of `frame`.
    pub fn of_frame(frame: &TimeSeriesFrame, timestamp_column: &str) -> Self {
        Self {
            timestamp_column: timestamp_column.to_string(),
            columns: frame.columns().iter().map(|c| (c.name.clone(), c.data.kind())).collect(),
        }
    }
}

/// Read a frame from CSV. Columns absent from the schema are ignored; rows
/// are sorted by timestamp; numeric cells that fail to parse become missing.
pub fn parse_csv<R: Read>(reader: R, schema: &Schema) -> Result<TimeSeriesFrame> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let position = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let ts_idx = position(&schema.timestamp_column)?;
    let col_idx = schema.columns.iter().map(|(name, _)| position(name)).collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<(Timestamp, csv::StringRecord)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let ts = Timestamp::parse_iso8601(record.get(ts_idx).unwrap_or(""))?;
        rows.push((ts, record));
    }
    rows.sort_by_key(|(ts, _)| *ts);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateTimestamp(w[0].0.to_iso8601()));
    }

    let timestamps: Vec<Timestamp> = rows.iter().map(|(ts, _)| *ts).collect();
    let columns = schema
        .columns
        .iter()
        .zip(&col_idx)
        .map(|((name, kind), &idx)| {
            let cells = rows.iter().map(|(_, rec)| rec.get(idx).unwrap_or("").trim());
            let data = match kind {
                ColumnKind::Continuous { unit } => ColumnData::Continuous {
                    values: cells.map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite())).collect(),
                    unit: unit.clone(),
                },
                ColumnKind::Integer => ColumnData::Integer(cells.map(|s| s.parse::<i64>().ok()).collect()),
                ColumnKind::Categorical => ColumnData::Categorical(
                    cells.map(|s| if s.is_empty() { None } else { Some(s.to_string()) }).collect(),
                ),
            };
            Column { name: name.clone(), data }
        })
        .collect();
    TimeSeriesFrame::new(timestamps, columns)
}

/// Write a frame as CSV with the timestamp in the first column.
pub fn write_csv<W: Write>(frame: &TimeSeriesFrame, timestamp_column: &str, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let mut header = vec![timestamp_column.to_string()];
    header.extend(frame.columns().iter().map(|c| c.name.clone()));
    wtr.write_record(&header)?;
    for (row, ts) in frame.timestamps().iter().enumerate() {
        let mut record = Vec::with_capacity(frame.columns().len() + 1);
        record.push(ts.to_iso8601());
        record.extend(frame.columns().iter().map(|c| c.data.cell_text(row)));
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Pair each left row with the right row whose timestamp is nearest, within
/// `tolerance_secs`. Right columns are appended; unmatched cells are missing.
/// Equidistant candidates resolve to the earlier right row.
pub fn merge_nearest(left: &TimeSeriesFrame, right: &TimeSeriesFrame, tolerance_secs: i64) -> Result<TimeSeriesFrame> {
    if tolerance_secs < 0 {
        return Err(Error::InvalidParameter(format!("merge tolerance must be non-negative, got {tolerance_secs}")));
    }
    let rts = right.timestamps();
    let matches: Vec<Option<usize>> = left
        .timestamps()
        .iter()
        .map(|&t| {
            let pos = rts.partition_point(|&r| r < t);
            let before = pos.checked_sub(1);
            let after = (pos < rts.len()).then_some(pos);
            let dist = |i: usize| (rts[i].epoch_seconds() - t.epoch_seconds()).abs();
            let best = match (before, after) {
                (Some(b), Some(a)) => Some(if dist(a) < dist(b) { a } else { b }),
                (b, a) => b.or(a),
            };
            best.filter(|&i| dist(i) <= tolerance_secs)
        })
        .collect();

    let mut out = left.clone();
    for col in right.columns() {
        let mut data = col.data.missing_like(left.len());
        for (row, m) in matches.iter().enumerate() {
            if let Some(src) = *m {
                match (&mut data, &col.data) {
                    (ColumnData::Continuous { values: d, .. }, ColumnData::Continuous { values: s, .. }) => {
                        d[row] = s[src]
                    }
                    (ColumnData::Integer(d), ColumnData::Integer(s)) => d[row] = s[src],
                    (ColumnData::Categorical(d), ColumnData::Categorical(s)) => d[row] = s[src].clone(),
                    _ => unreachable!("missing_like preserves kind"),
                }
            }
        }
        out = out.with_column(Column { name: col.name.clone(), data })?;
    }
    Ok(out)
}

/// Names of the calendar columns appended by [`extract_calendar`].
pub const CALENDAR_COLUMNS: [&str; 4] = ["hour", "day", "month", "weekday"];

/// Append integer `hour`, `day`, `month` and `weekday` (0 = Monday) columns.
pub fn extract_calendar(frame: &TimeSeriesFrame) -> Result<TimeSeriesFrame> {
    if let Some(name) = CALENDAR_COLUMNS.iter().find(|n| frame.has_column(n)) {
        return Err(Error::DuplicateColumn(name.to_string()));
    }
    let cal: Vec<CalendarFeatures> = frame.timestamps().iter().map(|t| t.calendar()).collect();
    let pick = |f: fn(&CalendarFeatures) -> u8| cal.iter().map(|c| Some(f(c) as i64)).collect::<Vec<_>>();
    frame
        .clone()
        .with_column(Column::integer("hour", pick(|c| c.hour)))?
        .with_column(Column::integer("day", pick(|c| c.day)))?
        .with_column(Column::integer("month", pick(|c| c.month)))?
        .with_column(Column::integer("weekday", pick(|c| c.weekday)))
}
