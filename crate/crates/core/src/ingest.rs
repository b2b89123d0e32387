//! Loading time series from CSV files.
//!
//! Two layouts are accepted: one value per row, or `t,value` rows where the
//! value column is picked with a [`Column`] selector. Lines starting with `#`
//! are comments. Time indices are 1-based throughout the public API, so the
//! first sample is `x_1`.

use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// A finite sequence of real samples `x_1, ..., x_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    /// Wraps raw samples without checking them; see [`validate`].
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Samples `f` at the given times.
    pub fn sample<F: Fn(f64) -> f64>(times: &[f64], f: F) -> Self {
        Self::new(times.iter().map(|&t| f(t)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Returns `x_t` for a 1-based index.
    pub fn get(&self, t: usize) -> Option<f64> {
        t.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }
}

impl From<Vec<f64>> for TimeSeries {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

/// `sin(2 pi t)` with exact values at quarter periods. Library `sin` leaves
/// residues around `1e-16` at those points, enough to push a distance of 1
/// just above a scale of 1.
pub fn sin_turns(t: f64) -> f64 {
    let quarters = 4.0 * t;
    if quarters == quarters.round() {
        match (quarters as i64).rem_euclid(4) {
            1 => 1.0,
            3 => -1.0,
            _ => 0.0,
        }
    } else {
        (2.0 * std::f64::consts::PI * t).sin()
    }
}

/// One period of `sin(2 pi t)` sampled at `t = 0, 1/4, ..., 1`.
pub fn periodic_profile() -> TimeSeries {
    TimeSeries::sample(&[0.0, 0.25, 0.5, 0.75, 1.0], sin_turns)
}

/// Which CSV column holds the samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    /// Zero-based field index.
    Index(usize),
    /// Header name; the first non-comment row is then treated as a header.
    Name(String),
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Index(i) => write!(f, "#{i}"),
            Column::Name(name) => write!(f, "{name:?}"),
        }
    }
}

impl std::str::FromStr for Column {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.trim().to_string()),
        })
    }
}

/// Loads a series from `path`. Without a selector the last field of each row
/// is used, which covers both the single-column and the `t,value` layout. A
/// first row without any numeric cell is skipped as a header.
pub fn load_csv(path: impl AsRef<Path>, column: Option<&Column>) -> Result<TimeSeries> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, column)
}

/// Parses CSV text from any reader; see [`load_csv`].
pub fn parse_csv<R: Read>(reader: R, column: Option<&Column>) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut index = match column {
        Some(Column::Index(i)) => Some(*i),
        _ => None,
    };
    let mut header_pending = matches!(column, Some(Column::Name(_)));
    let mut first_row = true;
    let mut values = Vec::new();

    for record in rdr.records() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if header_pending {
            let Some(Column::Name(name)) = column else {
                unreachable!()
            };
            let pos = record.iter().position(|h| h == name).ok_or_else(|| {
                Error::MissingColumn {
                    line,
                    column: name.clone(),
                }
            })?;
            index = Some(pos);
            header_pending = false;
            first_row = false;
            continue;
        }
        // a leading row with no numeric cell at all is a header
        let is_header = first_row && record.iter().all(|c| c.parse::<f64>().is_err());
        first_row = false;
        if is_header {
            continue;
        }
        let field = match index {
            Some(i) => record.get(i),
            None => record.iter().next_back(),
        };
        let cell = field.ok_or_else(|| Error::MissingColumn {
            line,
            column: column.map_or_else(|| "last".to_string(), ToString::to_string),
        })?;
        let value = cell
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::NonNumeric {
                line,
                cell: cell.to_string(),
            })?;
        values.push(value);
    }

    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(TimeSeries::new(values))
}

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    Empty,
    /// 1-based index of a NaN or infinite sample.
    NonFinite { index: usize, value: f64 },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::Empty => write!(f, "series has zero length"),
            Issue::NonFinite { index, value } => write!(f, "x_{index} = {value} is not finite"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

pub fn validate(ts: &TimeSeries) -> ValidationReport {
    if ts.is_empty() {
        return ValidationReport {
            issues: vec![Issue::Empty],
        };
    }
    let issues = ts
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_finite())
        .map(|(i, &value)| Issue::NonFinite {
            index: i + 1,
            value,
        })
        .collect();
    ValidationReport { issues }
}
