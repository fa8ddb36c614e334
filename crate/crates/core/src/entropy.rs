//! Roughness of the fuzzy partitions weighted by the regularity curve, and
//! the exponential / logarithmic ambiguity entropies built on it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fuzzy::ApproximationProfile;
use crate::regularity::{regularity_curve, RegularityCurve, TwoSampleMeasure};
use crate::series::{DetectorParams, TimeSeries};

/// Ambiguity entropy `H(s)` for every candidate changepoint `s = 1..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    values: Vec<f64>,
    params: DetectorParams,
    measure_name: String,
}

impl EntropyCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at 1-based candidate index.
    pub fn at(&self, s: usize) -> f64 {
        self.values[s - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn params(&self) -> &DetectorParams {
        &self.params
    }

    pub fn measure_name(&self) -> &str {
        &self.measure_name
    }
}

/// Roughness of the partition pair: `rho = 1 - sum(lower * R) / sum(upper * R)`
/// and the analogue for the complement. Both lie in `[0, 1]` because the
/// lower curve never exceeds the upper one and `R > 0`.
pub fn roughness(
    profile: &ApproximationProfile,
    regularity: &RegularityCurve,
) -> Result<(f64, f64)> {
    assert_eq!(
        profile.len(),
        regularity.len(),
        "profile and regularity curve must share t = 1..T"
    );
    let r = regularity.values();
    let dot = |curve: &[f64]| -> f64 { curve.iter().zip(r).map(|(c, rv)| c * rv).sum() };
    let num = dot(&profile.lower_gamma);
    let den = dot(&profile.upper_gamma);
    let num_c = dot(&profile.lower_gamma_c);
    let den_c = dot(&profile.upper_gamma_c);
    if den <= 0.0 || den_c <= 0.0 {
        return Err(Error::ZeroDenominator {
            s: profile.s.round() as usize,
        });
    }
    Ok((1.0 - num / den, 1.0 - num_c / den_c))
}

/// Exponential ambiguity entropy `rho * beta^(1-rho) + rho_c * beta^(1-rho_c)`.
/// Symmetric in its two roughness arguments; for `beta = e` it ranges over
/// `[0, 2]` on `[0, 1]^2`.
pub fn exp_entropy(rho: f64, rho_c: f64, beta: f64) -> f64 {
    debug_assert!(beta > 1.0);
    rho * beta.powf(1.0 - rho) + rho_c * beta.powf(1.0 - rho_c)
}

/// Logarithmic ambiguity entropy `-(chi(rho) + chi(rho_c)) / 2` with
/// `chi(x) = x log_beta(x / beta)` and the usual `0 log 0 = 0` convention.
pub fn log_entropy(rho: f64, rho_c: f64, beta: f64) -> f64 {
    debug_assert!(beta > 1.0);
    let chi = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            x * (x / beta).ln() / beta.ln()
        }
    };
    -0.5 * (chi(rho) + chi(rho_c))
}

/// Entropy curve computed from an existing regularity curve. The profiles
/// are rebuilt per candidate `s`; the regularity curve is shared read-only.
pub fn entropy_curve_from(
    regularity: &RegularityCurve,
    params: &DetectorParams,
) -> Result<EntropyCurve> {
    let t_len = regularity.len();
    params.validate(t_len)?;
    let values: Vec<f64> = (1..=t_len)
        .into_par_iter()
        .map(|s| {
            let profile =
                ApproximationProfile::new(s as f64, params.big_delta, params.w, t_len);
            let (rho, rho_c) = roughness(&profile, regularity)?;
            Ok(exp_entropy(rho, rho_c, params.beta))
        })
        .collect::<Result<_>>()?;
    Ok(EntropyCurve {
        values,
        params: *params,
        measure_name: regularity.measure_name().to_string(),
    })
}

/// Full pipeline: regularity curve for the chosen measure, then the entropy
/// curve over all candidates.
pub fn entropy_curve<M: TwoSampleMeasure>(
    series: &TimeSeries,
    params: &DetectorParams,
    measure: &M,
) -> Result<EntropyCurve> {
    params.validate(series.len())?;
    let regularity = regularity_curve(series, params.delta_reg, measure)?;
    entropy_curve_from(&regularity, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularity::Measure;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn flat_curve(t_len: usize) -> RegularityCurve {
        RegularityCurve::from_values(vec![1.0; t_len], 5, "test").unwrap()
    }

    fn profile_from_curves(lower: Vec<f64>, upper: Vec<f64>) -> ApproximationProfile {
        let lower_gamma_c: Vec<f64> = upper.iter().map(|v| 1.0 - v).collect();
        let upper_gamma_c: Vec<f64> = lower.iter().map(|v| 1.0 - v).collect();
        ApproximationProfile {
            s: 1.0,
            lower_gamma: lower,
            upper_gamma: upper,
            lower_gamma_c,
            upper_gamma_c,
        }
    }

    #[test]
    fn roughness_hand_case() {
        let profile = profile_from_curves(vec![1.0, 0.5, 0.0], vec![1.0, 1.0, 0.5]);
        let r = flat_curve(3);
        let (rho, _) = roughness(&profile, &r).unwrap();
        assert_abs_diff_eq!(rho, 0.4, epsilon = 1e-15);
    }

    #[test]
    fn roughness_crisp_is_zero() {
        let profile = profile_from_curves(vec![1.0, 1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0, 0.0]);
        let r = flat_curve(4);
        let (rho, rho_c) = roughness(&profile, &r).unwrap();
        assert_eq!(rho, 0.0);
        assert_eq!(rho_c, 0.0);
    }

    #[test]
    fn roughness_vanishing_lower_is_one() {
        let profile = profile_from_curves(vec![0.0, 0.0, 0.0], vec![0.5, 1.0, 0.5]);
        let r = flat_curve(3);
        let (rho, _) = roughness(&profile, &r).unwrap();
        assert_eq!(rho, 1.0);
    }

    #[test]
    fn exp_entropy_reference_points() {
        assert_eq!(exp_entropy(0.0, 0.0, E), 0.0);
        assert_abs_diff_eq!(exp_entropy(1.0, 1.0, E), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(exp_entropy(0.5, 0.5, E), E.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn log_entropy_reference_points() {
        assert_eq!(log_entropy(0.0, 0.0, E), 0.0);
        assert_abs_diff_eq!(log_entropy(1.0, 1.0, E), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            log_entropy(0.5, 0.5, E),
            0.5 * (1.0 + 2.0f64.ln()),
            epsilon = 1e-15
        );
    }

    // With a constant series R is identically 1 and the curve is a smooth
    // shallow bowl: the truncated sums over t = 1..T give the partition at
    // candidate s the masses ~(s -/+ w), so the roughness pair drifts with
    // s and is balanced at the series midpoint.
    #[test]
    fn curve_constant_series_is_smooth_bowl() {
        let t_len = 200;
        let series = TimeSeries::univariate(vec![1.0; t_len]).unwrap();
        let params = DetectorParams::new(10, 8.0, 8.0);
        let curve = entropy_curve(&series, &params, &Measure::Ks).unwrap();
        assert_eq!(curve.len(), t_len);
        assert!(curve.values().iter().all(|v| (0.0..=2.0).contains(v)));
        let margin = (2.0 * params.w + params.big_delta).ceil() as usize + 1;
        assert!(curve.at(t_len / 2) < curve.at(t_len / 4));
        assert!(curve.at(t_len / 4) < curve.at(margin));
        let center = crate::detector::detect_single(&curve) as f64;
        assert!(
            (center - t_len as f64 / 2.0).abs() <= 2.0,
            "argmin at {center}"
        );
    }

    #[test]
    fn curve_scale_invariant_in_regularity() {
        let t_len = 120;
        let raw: Vec<f64> = (0..t_len)
            .map(|i| 0.3 + 0.5 * ((i as f64 * 0.13).sin().abs()))
            .collect();
        let r1 = RegularityCurve::from_values(raw.clone(), 5, "test").unwrap();
        let scaled: Vec<f64> = raw.iter().map(|v| v * 0.37).collect();
        let r2 = RegularityCurve::from_values(scaled, 5, "test").unwrap();
        let params = DetectorParams::new(5, 6.0, 6.0);
        let c1 = entropy_curve_from(&r1, &params).unwrap();
        let c2 = entropy_curve_from(&r2, &params).unwrap();
        for (a, b) in c1.values().iter().zip(c2.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn exp_entropy_bounds_and_symmetry(
            rho in 0.0f64..=1.0,
            rho_c in 0.0f64..=1.0,
        ) {
            let h = exp_entropy(rho, rho_c, E);
            prop_assert!((0.0..=2.0).contains(&h));
            prop_assert!((h - exp_entropy(rho_c, rho, E)).abs() < 1e-15);
            let l = log_entropy(rho, rho_c, E);
            prop_assert!((-1e-15..=1.0 + 1e-15).contains(&l));
        }
    }
}
