//! Time-series data model, CSV ingestion and detector parameters.
//!
//! Observations are stored row-major as a `T x p` matrix. Time indices are
//! 1-based throughout the crate, matching the convention `t = 1..T` used by
//! every formula downstream; only raw slice accesses subtract one.

use std::f64::consts::E;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered multivariate observations `y_t` in `R^p` for `t = 1..T`.
///
/// Immutable after construction, so it can be shared freely across worker
/// threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    t_len: usize,
    dim: usize,
}

impl TimeSeries {
    /// Builds a series from row-major values; enforces `T >= 2`, `p >= 1`
    /// and finiteness of every entry.
    pub fn new(values: Vec<f64>, t_len: usize, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSeries("p must be >= 1".into()));
        }
        if t_len < 2 {
            return Err(Error::InvalidSeries(format!(
                "T must be >= 2, got {t_len}"
            )));
        }
        if values.len() != t_len * dim {
            return Err(Error::InvalidSeries(format!(
                "expected {t_len}x{dim}={} values, got {}",
                t_len * dim,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite entry at row {}, column {}",
                pos / dim + 1,
                pos % dim + 1
            )));
        }
        Ok(Self { values, t_len, dim })
    }

    /// Convenience constructor for univariate data.
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        let t_len = values.len();
        Self::new(values, t_len, 1)
    }

    /// Number of time points `T`.
    pub fn len(&self) -> usize {
        self.t_len
    }

    pub fn is_empty(&self) -> bool {
        self.t_len == 0
    }

    /// Dimension `p` of each observation.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Observation at 1-based time index `t`.
    pub fn row(&self, t: usize) -> &[f64] {
        debug_assert!((1..=self.t_len).contains(&t));
        let start = (t - 1) * self.dim;
        &self.values[start..start + self.dim]
    }

    /// Raw row-major storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The single column of a univariate series.
    pub fn univariate_values(&self) -> Result<&[f64]> {
        if self.dim != 1 {
            return Err(Error::InvalidSeries(format!(
                "expected univariate series, got p={}",
                self.dim
            )));
        }
        Ok(&self.values)
    }
}

/// Loads a CSV file with one observation per row, comma separated, optional
/// single header row. All cells must parse as finite reals and every row
/// must have the same number of columns.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, has_header)
}

/// CSV parsing backing [`load_csv`]; split out for testability.
pub fn parse_csv(text: &str, has_header: bool) -> Result<TimeSeries> {
    let mut values = Vec::new();
    let mut dim = 0usize;
    let mut rows = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if has_header && idx == 0 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = 0usize;
        for (c, cell) in line.split(',').enumerate() {
            let cell = cell.trim();
            let v: f64 = cell.parse().map_err(|_| Error::Csv {
                line: line_no,
                column: c + 1,
                message: format!("cannot parse `{cell}` as a real number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line: line_no,
                    column: c + 1,
                    message: format!("non-finite value `{cell}`"),
                });
            }
            values.push(v);
            cols += 1;
        }
        if rows == 0 {
            dim = cols;
        } else if cols != dim {
            return Err(Error::Csv {
                line: line_no,
                column: cols,
                message: format!("expected {dim} columns, found {cols}"),
            });
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptyInput("no data rows in CSV input".into()));
    }
    TimeSeries::new(values, rows, dim)
}

/// The hyperparameter triple (delta, Delta, w) plus entropy base and test
/// level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Regularity half-window `delta` in samples.
    pub delta_reg: usize,
    /// Fuzziness half-width `Delta` in samples.
    pub big_delta: f64,
    /// Roughness half-width `w` in samples.
    pub w: f64,
    /// Entropy base `beta`, must exceed 1.
    pub beta: f64,
    /// Test level `alpha` in (0, 1).
    pub alpha: f64,
}

impl DetectorParams {
    /// Parameters with the defaults `beta = e`, `alpha = 0.05`.
    pub fn new(delta_reg: usize, big_delta: f64, w: f64) -> Self {
        Self {
            delta_reg,
            big_delta,
            w,
            beta: E,
            alpha: 0.05,
        }
    }

    /// Checks every invariant against the series length `T`. Pure: same
    /// inputs always yield the same verdict. Returns the parameters
    /// unchanged on success; otherwise lists every violation.
    pub fn validate(&self, t_len: usize) -> Result<Self> {
        let mut violations = Vec::new();
        if self.delta_reg == 0 {
            violations.push("delta must be a positive integer".to_string());
        }
        if !(self.big_delta > 0.0) || !self.big_delta.is_finite() {
            violations.push(format!(
                "Delta must be a positive real, got {}",
                self.big_delta
            ));
        }
        if !(self.w > 0.0) || !self.w.is_finite() {
            violations.push(format!("w must be a positive real, got {}", self.w));
        }
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            violations.push(format!("beta must exceed 1, got {}", self.beta));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            violations.push(format!("alpha must lie in (0,1), got {}", self.alpha));
        }
        if 2 * self.delta_reg >= t_len {
            violations.push(format!(
                "2*delta = {} must be < T = {t_len} so a full two-sample window fits",
                2 * self.delta_reg
            ));
        }
        if self.big_delta.is_finite()
            && self.w.is_finite()
            && !(self.big_delta + 2.0 * self.w < t_len as f64 / 2.0)
        {
            violations.push(format!(
                "Delta + 2w = {} must be < T/2 = {} so the approximation band fits",
                self.big_delta + 2.0 * self.w,
                t_len as f64 / 2.0
            ));
        }
        if violations.is_empty() {
            Ok(*self)
        } else {
            Err(Error::InvalidParams(violations))
        }
    }
}
