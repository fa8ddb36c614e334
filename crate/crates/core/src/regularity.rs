//! Sliding-window two-sample regularity measures.
//!
//! For each time point `t` the series is split into a left window
//! `{max(1, t-delta+1) .. t}` and a right window `{t+1 .. min(T, t+delta)}`,
//! a two-sample statistic is computed between them and mapped to
//! `R = 1 / (1 + stat)` so that `R` is close to 1 where the windows look
//! alike and drops towards 0 across a change. Windows are truncated at the
//! series edges; time points whose truncated windows are too small for the
//! chosen statistic inherit the value of the nearest valid point (in
//! particular `R(T) := R(T-1)` where the right window is empty).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Regularity curve `R(t)` for `t = 1..T`, values in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityCurve {
    values: Vec<f64>,
    delta_reg: usize,
    measure_name: String,
}

impl RegularityCurve {
    /// Wraps precomputed values; intended for tests and for callers that
    /// bring their own measure.
    pub fn from_values(values: Vec<f64>, delta_reg: usize, measure_name: &str) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("regularity curve".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0 && *v <= 1.0)) {
            return Err(Error::InvalidSeries(
                "regularity values must lie in (0, 1]".into(),
            ));
        }
        Ok(Self {
            values,
            delta_reg,
            measure_name: measure_name.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at 1-based time index.
    pub fn at(&self, t: usize) -> f64 {
        self.values[t - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn delta_reg(&self) -> usize {
        self.delta_reg
    }

    pub fn measure_name(&self) -> &str {
        &self.measure_name
    }
}

/// 1-based inclusive index ranges of the two windows flanking `t`.
/// The right window is empty only at `t = T`.
pub fn windows_at(t: usize, delta_reg: usize, t_len: usize) -> (Vec<usize>, Vec<usize>) {
    debug_assert!((1..=t_len).contains(&t));
    let left_start = t.saturating_sub(delta_reg - 1).max(1);
    let right_end = (t + delta_reg).min(t_len);
    let left = (left_start..=t).collect();
    let right = (t + 1..=right_end).collect();
    (left, right)
}

/// A pluggable two-sample regularity measure. Implementations must be pure
/// functions of their arguments so curve evaluation can run in parallel.
pub trait TwoSampleMeasure: Sync {
    /// Identifier used in reports and CLI flags.
    fn name(&self) -> String;

    /// Smallest window sizes `(left, right)` the statistic is defined for.
    fn min_window_sizes(&self) -> (usize, usize);

    /// Evaluates `R(t)` on the truncated windows at `t`.
    fn evaluate(&self, series: &TimeSeries, t: usize, delta_reg: usize) -> Result<f64>;
}

/// Built-in measures selectable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    /// Exact two-sample Kolmogorov-Smirnov statistic, univariate.
    Ks,
    /// Squared two-sample t statistic, univariate. `welch: false` pools the
    /// variances (classical equal-variance test).
    TTest { welch: bool },
    /// Hotelling-style quadratic form on the window means, any dimension.
    /// `ridge: None` uses the default `1e-8 * trace(Sigma) / p`.
    Hotelling { ridge: Option<f64> },
}

impl Measure {
    /// Parses a CLI measure name.
    pub fn from_name(name: &str, welch: bool, ridge: Option<f64>) -> Result<Self> {
        match name {
            "ks" => Ok(Measure::Ks),
            "t" | "ttest" => Ok(Measure::TTest { welch }),
            "hotelling" => Ok(Measure::Hotelling { ridge }),
            other => Err(Error::UnknownMeasure(other.to_string())),
        }
    }
}

impl TwoSampleMeasure for Measure {
    fn name(&self) -> String {
        match self {
            Measure::Ks => "ks".into(),
            Measure::TTest { welch: false } => "t".into(),
            Measure::TTest { welch: true } => "t-welch".into(),
            Measure::Hotelling { .. } => "hotelling".into(),
        }
    }

    fn min_window_sizes(&self) -> (usize, usize) {
        match self {
            Measure::Ks => (1, 1),
            // The pooled variance needs at least one degree of freedom
            // (n1 + n2 >= 3); Welch needs a variance per window.
            Measure::TTest { welch: false } => (1, 2),
            Measure::TTest { welch: true } => (2, 2),
            Measure::Hotelling { .. } => (2, 2),
        }
    }

    fn evaluate(&self, series: &TimeSeries, t: usize, delta_reg: usize) -> Result<f64> {
        match self {
            Measure::Ks => ks_regularity(series, t, delta_reg),
            Measure::TTest { welch } => ttest_regularity(series, t, delta_reg, *welch),
            Measure::Hotelling { ridge } => hotelling_regularity(series, t, delta_reg, *ridge),
        }
    }
}

fn univariate_windows<'a>(
    series: &'a TimeSeries,
    t: usize,
    delta_reg: usize,
    measure: &str,
) -> Result<(&'a [f64], &'a [f64])> {
    if series.dim() != 1 {
        return Err(Error::DimensionMismatch {
            measure: measure.to_string(),
            dim: series.dim(),
        });
    }
    let values = series.univariate_values()?;
    let t_len = series.len();
    let left_start = t.saturating_sub(delta_reg - 1).max(1);
    let right_end = (t + delta_reg).min(t_len);
    Ok((&values[left_start - 1..t], &values[t..right_end]))
}

/// Exact two-sample Kolmogorov-Smirnov statistic `sup_x |F1(x) - F2(x)|`,
/// computed by merging the sorted windows; ties are handled by consuming
/// every copy of a value in both samples before the CDF gap is read.
pub fn ks_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert!(!xs.is_empty() && !ys.is_empty());
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() || j < ys.len() {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// `R = 1 / (1 + D)` with `D` the exact KS statistic on the two windows.
pub fn ks_regularity(series: &TimeSeries, t: usize, delta_reg: usize) -> Result<f64> {
    let (left, right) = univariate_windows(series, t, delta_reg, "ks")?;
    if left.is_empty() || right.is_empty() {
        return Err(Error::NoValidWindows {
            measure: "ks".into(),
            t_len: series.len(),
            delta: delta_reg,
        });
    }
    Ok(1.0 / (1.0 + ks_statistic(left, right)))
}

fn mean_and_ss(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (mean, ss)
}

/// `R = 1 / (1 + T^2)` with `T` the two-sample t statistic (pooled variance
/// by default, Welch optionally). A zero-variance pair of windows saturates:
/// `R = 1` when the means agree, the smallest positive value otherwise.
pub fn ttest_regularity(
    series: &TimeSeries,
    t: usize,
    delta_reg: usize,
    welch: bool,
) -> Result<f64> {
    let (left, right) = univariate_windows(series, t, delta_reg, "t")?;
    let (n1, n2) = (left.len(), right.len());
    let ok = if welch {
        n1 >= 2 && n2 >= 2
    } else {
        n1 >= 1 && n2 >= 1 && n1 + n2 >= 3
    };
    if !ok {
        return Err(Error::NoValidWindows {
            measure: "t".into(),
            t_len: series.len(),
            delta: delta_reg,
        });
    }
    let (m1, ss1) = mean_and_ss(left);
    let (m2, ss2) = mean_and_ss(right);
    let se2 = if welch {
        ss1 / (n1 as f64 - 1.0) / n1 as f64 + ss2 / (n2 as f64 - 1.0) / n2 as f64
    } else {
        let pooled = (ss1 + ss2) / (n1 + n2 - 2) as f64;
        pooled * (1.0 / n1 as f64 + 1.0 / n2 as f64)
    };
    if se2 <= 0.0 {
        return Ok(if m1 == m2 { 1.0 } else { f64::MIN_POSITIVE });
    }
    let t_stat_sq = (m1 - m2).powi(2) / se2;
    Ok(1.0 / (1.0 + t_stat_sq))
}

/// `R = 1 / (1 + (y1 - y2)' (Sigma + ridge I)^-1 (y1 - y2))` with `Sigma`
/// the second-moment matrix of both windows about the midpoint of the two
/// window means, divided by half the pooled count (`delta` when the windows
/// are untruncated).
pub fn hotelling_regularity(
    series: &TimeSeries,
    t: usize,
    delta_reg: usize,
    ridge: Option<f64>,
) -> Result<f64> {
    let p = series.dim();
    let t_len = series.len();
    let left_start = t.saturating_sub(delta_reg - 1).max(1);
    let right_end = (t + delta_reg).min(t_len);
    let (n1, n2) = (t - left_start + 1, right_end - t);
    if n1 < 2 || n2 < 2 {
        return Err(Error::NoValidWindows {
            measure: "hotelling".into(),
            t_len,
            delta: delta_reg,
        });
    }

    let mut mean1 = DVector::zeros(p);
    for ti in left_start..=t {
        mean1 += DVector::from_column_slice(series.row(ti));
    }
    mean1 /= n1 as f64;
    let mut mean2 = DVector::zeros(p);
    for ti in t + 1..=right_end {
        mean2 += DVector::from_column_slice(series.row(ti));
    }
    mean2 /= n2 as f64;

    let mid = (&mean1 + &mean2) / 2.0;
    let mut sigma = DMatrix::zeros(p, p);
    for ti in left_start..=right_end {
        let dev = DVector::from_column_slice(series.row(ti)) - &mid;
        sigma += &dev * dev.transpose();
    }
    sigma /= (n1 + n2) as f64 / 2.0;

    let ridge = ridge.unwrap_or_else(|| 1e-8 * sigma.trace() / p as f64);
    for i in 0..p {
        sigma[(i, i)] += ridge;
    }

    let diff = &mean1 - &mean2;
    let solved = sigma
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&diff))
        .or_else(|| sigma.lu().solve(&diff))
        .ok_or(Error::SingularCovariance)?;
    let stat = diff.dot(&solved);
    if !stat.is_finite() {
        return Err(Error::SingularCovariance);
    }
    Ok(1.0 / (1.0 + stat.max(0.0)))
}

/// Evaluates the measure at every `t = 1..T` with truncated windows,
/// extending the boundary values over the (at most few) edge points whose
/// windows are below the measure's minimum sizes.
pub fn regularity_curve<M: TwoSampleMeasure>(
    series: &TimeSeries,
    delta_reg: usize,
    measure: &M,
) -> Result<RegularityCurve> {
    let t_len = series.len();
    let (min_left, min_right) = measure.min_window_sizes();
    let mut lo = None;
    let mut hi = None;
    for t in 1..=t_len {
        let left_len = t - t.saturating_sub(delta_reg - 1).max(1) + 1;
        let right_len = (t + delta_reg).min(t_len) - t;
        let valid = left_len >= min_left
            && right_len >= min_right
            && left_len + right_len >= min_left + min_right;
        if valid {
            lo.get_or_insert(t);
            hi = Some(t);
        }
    }
    let (lo, hi) = match (lo, hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            return Err(Error::NoValidWindows {
                measure: measure.name(),
                t_len,
                delta: delta_reg,
            })
        }
    };

    let interior: Vec<f64> = (lo..=hi)
        .into_par_iter()
        .map(|t| measure.evaluate(series, t, delta_reg))
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(t_len);
    values.extend(std::iter::repeat(interior[0]).take(lo - 1));
    values.extend_from_slice(&interior);
    values.extend(std::iter::repeat(interior[interior.len() - 1]).take(t_len - hi));
    RegularityCurve::from_values(values, delta_reg, &measure.name())
}
