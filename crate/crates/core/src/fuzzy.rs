//! Fuzzy membership, tolerance function and rough lower/upper approximations
//! of the two partitions induced by a candidate changepoint.
//!
//! The membership and tolerance functions are quadratic S-curves. The
//! approximations come in two flavours: exact closed forms (piecewise
//! quadratics with denominator `2(w + Delta)`) and a brute-force inf/sup
//! over a fine grid, kept as an independent cross-check of the closed
//! forms. All formulas are defined on continuous `t`; integer sampling
//! happens only when a profile is materialised over `t = 1..T`.

/// Fuzzy membership of time `t` in the left partition for a candidate
/// changepoint `s` with half-width `big_delta`.
///
/// Standard Zadeh S-shape: 1 up to `s - Delta`, 0 from `s + Delta`,
/// quadratic blend in between with `mu(s) = 1/2`, and antisymmetric:
/// `mu(t) = 1 - mu(2s - t)`.
pub fn membership(t: f64, s: f64, big_delta: f64) -> f64 {
    debug_assert!(big_delta > 0.0);
    let d = big_delta;
    if t <= s - d {
        1.0
    } else if t <= s {
        1.0 - 2.0 * ((t - (s - d)) / (2.0 * d)).powi(2)
    } else if t <= s + d {
        2.0 * (((s + d) - t) / (2.0 * d)).powi(2)
    } else {
        0.0
    }
}

/// Tolerance (similarity) between two time points with roughness half-width
/// `w`. Depends only on `|t - t'|`; equals 1 at zero distance and vanishes
/// at distance `2w` and beyond.
pub fn tolerance(t: f64, t_prime: f64, w: f64) -> f64 {
    debug_assert!(w > 0.0);
    let a = (t - t_prime).abs();
    if a >= 2.0 * w {
        0.0
    } else if a > w {
        2.0 * ((2.0 * w - a) / (2.0 * w)).powi(2)
    } else {
        1.0 - 2.0 * (a / (2.0 * w)).powi(2)
    }
}

/// Closed-form lower approximation of the left partition at time `t`.
///
/// Continuous and nonincreasing in `t`: 1 below `s - 2w - Delta`, 0 from
/// `s + Delta`, quadratic blend with denominator `2(w + Delta)` in between.
pub fn lower_approx(s: f64, big_delta: f64, w: f64, t: f64) -> f64 {
    let d = big_delta;
    let den = 2.0 * (w + d);
    if t >= s + d {
        0.0
    } else if t >= s - w {
        2.0 * (((s + d) - t) / den).powi(2)
    } else if t >= s - 2.0 * w - d {
        1.0 - 2.0 * (((t + 2.0 * w) - (s - d)) / den).powi(2)
    } else {
        1.0
    }
}

/// Closed-form upper approximation of the left partition at time `t`.
///
/// Mirrors [`lower_approx`]: `upper(t) = 1 - lower(2s - t)`.
pub fn upper_approx(s: f64, big_delta: f64, w: f64, t: f64) -> f64 {
    let d = big_delta;
    let den = 2.0 * (w + d);
    if t >= s + 2.0 * w + d {
        0.0
    } else if t >= s + w {
        2.0 * (((s + d) - (t - 2.0 * w)) / den).powi(2)
    } else if t >= s - d {
        1.0 - 2.0 * ((t - (s - d)) / den).powi(2)
    } else {
        1.0
    }
}

/// Brute-force lower/upper approximations straight from the inf-max /
/// sup-min definitions, evaluated on a grid of step `grid_step` over
/// `[t - 2w, t + 2w]` (outside that window the tolerance vanishes and the
/// envelope cannot improve). Independent of the closed forms above.
pub fn brute_force_approx(
    s: f64,
    big_delta: f64,
    w: f64,
    t: f64,
    grid_step: f64,
) -> (f64, f64) {
    assert!(grid_step > 0.0 && grid_step <= 0.1, "grid_step must be in (0, 0.1]");
    let lo = t - 2.0 * w;
    let hi = t + 2.0 * w;
    let steps = ((hi - lo) / grid_step).ceil() as usize;
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for k in 0..=steps {
        let psi = (lo + k as f64 * grid_step).min(hi);
        let tol = tolerance(t, psi, w);
        let mu = membership(psi, s, big_delta);
        lower = lower.min((1.0 - tol).max(mu));
        upper = upper.max(tol.min(mu));
    }
    (lower, upper)
}

/// The four approximation curves of the partition pair `(gamma_s,
/// gamma_s^C)` sampled at integer `t = 1..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationProfile {
    /// Candidate changepoint, may be fractional.
    pub s: f64,
    pub lower_gamma: Vec<f64>,
    pub upper_gamma: Vec<f64>,
    pub lower_gamma_c: Vec<f64>,
    pub upper_gamma_c: Vec<f64>,
}

impl ApproximationProfile {
    /// Evaluates the closed forms over `t = 1..T`; the complement curves
    /// come from the duality `lower_c = 1 - upper`, `upper_c = 1 - lower`.
    pub fn new(s: f64, big_delta: f64, w: f64, t_len: usize) -> Self {
        let mut lower_gamma = Vec::with_capacity(t_len);
        let mut upper_gamma = Vec::with_capacity(t_len);
        let mut lower_gamma_c = Vec::with_capacity(t_len);
        let mut upper_gamma_c = Vec::with_capacity(t_len);
        for ti in 1..=t_len {
            let t = ti as f64;
            let lo = lower_approx(s, big_delta, w, t);
            let up = upper_approx(s, big_delta, w, t);
            lower_gamma.push(lo);
            upper_gamma.push(up);
            lower_gamma_c.push(1.0 - up);
            upper_gamma_c.push(1.0 - lo);
        }
        Self {
            s,
            lower_gamma,
            upper_gamma,
            lower_gamma_c,
            upper_gamma_c,
        }
    }

    /// Number of sampled time points.
    pub fn len(&self) -> usize {
        self.lower_gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower_gamma.is_empty()
    }

    /// Profile of the complementary partition: swaps the curve pairs via
    /// the same duality. Applying it twice returns the original profile.
    pub fn complement(&self) -> Self {
        Self {
            s: self.s,
            lower_gamma: self.upper_gamma.iter().map(|v| 1.0 - v).collect(),
            upper_gamma: self.lower_gamma.iter().map(|v| 1.0 - v).collect(),
            lower_gamma_c: self.upper_gamma_c.iter().map(|v| 1.0 - v).collect(),
            upper_gamma_c: self.lower_gamma_c.iter().map(|v| 1.0 - v).collect(),
        }
    }
}
