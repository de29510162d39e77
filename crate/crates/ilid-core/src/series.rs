//! Time-series container, CSV ingestion, windowing and z-score normalization.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from loading, windowing or normalizing series.
#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv parse failure in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("column {column:?} not found in {path}")]
    ColumnNotFound { path: String, column: String },
    #[error("non-numeric or empty cell {cell:?} in column {column:?} at row {row}")]
    BadCell {
        column: String,
        row: usize,
        cell: String,
    },
    #[error("value at index {index} is not finite")]
    NotFinite { index: usize },
    #[error("series is empty")]
    Empty,
    #[error("invalid window shape: T={t}, tau={tau}, step={step}")]
    BadWindowShape { t: usize, tau: usize, step: usize },
    #[error("series too short: {len} values cannot fit one window of T={t} plus tau={tau}")]
    TooShort { len: usize, t: usize, tau: usize },
    #[error("standard deviation must be positive, got {std}")]
    DegenerateStd { std: f64 },
}

/// A univariate series of finite values with an informational sampling tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub name: String,
    pub values: Vec<f64>,
    /// Sampling-period tag such as `"1h"`; informational only.
    pub interval: String,
}

impl TimeSeries {
    /// Builds a series, rejecting empty input and non-finite values.
    pub fn new(
        name: impl Into<String>,
        values: Vec<f64>,
        interval: impl Into<String>,
    ) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NotFinite { index });
        }
        Ok(Self {
            name: name.into(),
            values,
            interval: interval.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One detection unit: a context of length `T` and an optional ground-truth
/// horizon of length `tau`, both contiguous slices of the source series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleWindow {
    pub context: Vec<f64>,
    pub truth: Option<Vec<f64>>,
    /// Offset of `context[0]` in the source series.
    pub origin_index: usize,
}

impl SampleWindow {
    pub fn context_len(&self) -> usize {
        self.context.len()
    }

    pub fn horizon(&self) -> usize {
        self.truth.as_ref().map_or(0, Vec::len)
    }
}

/// Normalization statistics. `std` is the population (divide-by-n) standard
/// deviation; the divide-by-n convention is fixed so that stats round-trip
/// across runs and languages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: f64,
    pub std: f64,
}

impl NormStats {
    /// Computes mean and population std over `values`.
    ///
    /// Errors when the values are constant (std would be zero).
    pub fn from_values(values: &[f64]) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std <= 0.0 {
            return Err(SeriesError::DegenerateStd { std });
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn invert(&self, v: f64) -> f64 {
        v * self.std + self.mean
    }
}

/// Parses one named column of a CSV file (UTF-8, comma-separated, single
/// header row, `.` decimal point) into a series, preserving row order.
///
/// Cells that are empty or non-numeric are rejected with their 1-based data
/// row number; nothing is imputed.
pub fn load_csv(path: impl AsRef<Path>, column: &str) -> Result<TimeSeries, SeriesError> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| SeriesError::Io {
        path: path_str.clone(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);

    let headers = reader.headers().map_err(|source| SeriesError::Csv {
        path: path_str.clone(),
        source,
    })?;
    let col_idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| SeriesError::ColumnNotFound {
            path: path_str.clone(),
            column: column.to_string(),
        })?;

    let mut values = Vec::new();
    for (row_zero, record) in reader.records().enumerate() {
        let row = row_zero + 1; // 1-based data row, header excluded
        let record = record.map_err(|source| SeriesError::Csv {
            path: path_str.clone(),
            source,
        })?;
        let cell = record.get(col_idx).unwrap_or("");
        let parsed: f64 = cell
            .trim()
            .parse()
            .map_err(|_| SeriesError::BadCell {
                column: column.to_string(),
                row,
                cell: cell.to_string(),
            })?;
        if !parsed.is_finite() {
            return Err(SeriesError::BadCell {
                column: column.to_string(),
                row,
                cell: cell.to_string(),
            });
        }
        values.push(parsed);
    }

    TimeSeries::new(column, values, "")
}

/// Cuts the series into windows of `t` context values followed by `tau`
/// truth values, starting at indices `0, step, 2*step, ...` while both
/// segments fit. Non-overlapping windows correspond to `step = t + tau`.
///
/// A series too short for even one window is an error so the caller cannot
/// silently proceed with an empty sample set.
pub fn make_windows(
    series: &TimeSeries,
    t: usize,
    tau: usize,
    step: usize,
) -> Result<Vec<SampleWindow>, SeriesError> {
    if t == 0 || tau == 0 || tau > t || step == 0 {
        return Err(SeriesError::BadWindowShape { t, tau, step });
    }
    let len = series.len();
    if len < t + tau {
        return Err(SeriesError::TooShort { len, t, tau });
    }

    let mut windows = Vec::new();
    let mut start = 0;
    while start + t + tau <= len {
        windows.push(SampleWindow {
            context: series.values[start..start + t].to_vec(),
            truth: Some(series.values[start + t..start + t + tau].to_vec()),
            origin_index: start,
        });
        start += step;
    }
    Ok(windows)
}

/// Maps every value through `(v - mean) / std`. Invertible via
/// [`denormalize`] given the same stats.
pub fn znormalize(series: &TimeSeries, stats: NormStats) -> Result<TimeSeries, SeriesError> {
    if stats.std <= 0.0 {
        return Err(SeriesError::DegenerateStd { std: stats.std });
    }
    Ok(TimeSeries {
        name: series.name.clone(),
        values: series.values.iter().map(|&v| stats.apply(v)).collect(),
        interval: series.interval.clone(),
    })
}

/// Inverse of [`znormalize`] for the same stats.
pub fn denormalize(series: &TimeSeries, stats: NormStats) -> Result<TimeSeries, SeriesError> {
    if stats.std <= 0.0 {
        return Err(SeriesError::DegenerateStd { std: stats.std });
    }
    Ok(TimeSeries {
        name: series.name.clone(),
        values: series.values.iter().map(|&v| stats.invert(v)).collect(),
        interval: series.interval.clone(),
    })
}
