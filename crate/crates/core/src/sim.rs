//! Scenario generation and Monte Carlo experiments.
//!
//! Every experiment is a pure function of (scenario, configuration, seed).
//! Noise comes from a ChaCha8 stream seeded per replicate (base seed plus
//! replicate index) and turned into standard normal variates with the
//! Box-Muller transform, so results are bit-reproducible across platforms
//! and thread counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detector;
use crate::entropy::entropy_curve_from;
use crate::error::{Error, Result};
use crate::fuzzy::membership;
use crate::regularity::{regularity_curve, Measure, RegularityCurve, TwoSampleMeasure};
use crate::series::{DetectorParams, TimeSeries};

/// Shape of the mean curve around the true changepoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Discrete jump: the mean steps from 0 to `jump` right after `cp`.
    S1Discrete,
    /// Continuous jump: linear ramp from 0 to `jump` over
    /// `[cp - F, cp + F]`.
    S2Continuous,
    /// Smooth jump: quadratic S-curve ramp of half-width `F`.
    S3Smooth,
}

impl ScenarioKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "s1" => Ok(Self::S1Discrete),
            "s2" => Ok(Self::S2Continuous),
            "s3" => Ok(Self::S3Smooth),
            other => Err(Error::InvalidScenario(format!(
                "unknown scenario `{other}` (expected s1, s2 or s3)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::S1Discrete => "s1",
            Self::S2Continuous => "s2",
            Self::S3Smooth => "s3",
        }
    }
}

/// A fully specified synthetic series: mean curve plus unit normal noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationScenario {
    pub kind: ScenarioKind,
    pub t_len: usize,
    /// True changepoint, `1 < cp < T`.
    pub cp: usize,
    /// Signal size: total rise of the mean curve.
    pub jump: f64,
    /// Ramp half-width `F`; ignored by S1.
    pub fuzziness: f64,
    pub seed: u64,
}

impl SimulationScenario {
    pub fn validate(&self) -> Result<()> {
        if !(1 < self.cp && self.cp < self.t_len) {
            return Err(Error::InvalidScenario(format!(
                "cp must satisfy 1 < cp < T, got cp={}, T={}",
                self.cp, self.t_len
            )));
        }
        if !self.jump.is_finite() {
            return Err(Error::InvalidScenario("jump must be finite".into()));
        }
        if !(self.fuzziness >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "fuzziness must be >= 0, got {}",
                self.fuzziness
            )));
        }
        Ok(())
    }

    /// Mean value at (1-based, possibly fractional) time `t`.
    pub fn mean_at(&self, t: f64) -> f64 {
        let cp = self.cp as f64;
        let f = self.fuzziness;
        match self.kind {
            ScenarioKind::S1Discrete => {
                if t <= cp {
                    0.0
                } else {
                    self.jump
                }
            }
            ScenarioKind::S2Continuous => {
                if f == 0.0 || t <= cp - f {
                    if t <= cp {
                        0.0
                    } else {
                        self.jump
                    }
                } else if t <= cp + f {
                    self.jump * (t - (cp - f)) / (2.0 * f)
                } else {
                    self.jump
                }
            }
            ScenarioKind::S3Smooth => {
                if f == 0.0 {
                    if t <= cp {
                        0.0
                    } else {
                        self.jump
                    }
                } else {
                    self.jump * (1.0 - membership(t, cp, f))
                }
            }
        }
    }

    /// Signal-to-noise ratio `E(S^2) / E(N^2)` with unit noise variance.
    pub fn snr(&self) -> f64 {
        let mean_sq: f64 = (1..=self.t_len)
            .map(|t| self.mean_at(t as f64).powi(2))
            .sum();
        mean_sq / self.t_len as f64
    }
}

/// Standard normal stream: ChaCha8 + Box-Muller.
///
/// Each uniform pair `(u1, u2)` with `u1 in (0, 1]` yields
/// `sqrt(-2 ln u1) * (cos, sin)(2 pi u2)`; both variates are consumed in
/// order, so the stream is a deterministic function of the seed.
struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - self.rng.gen::<f64>();
        let u2: f64 = self.rng.gen();
        let radius = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * theta.sin());
        radius * theta.cos()
    }
}

/// Generates the univariate series `y_t = mu(t) + eps_t` for the scenario.
pub fn gen_scenario(scenario: &SimulationScenario) -> Result<TimeSeries> {
    scenario.validate()?;
    let mut noise = GaussianStream::new(scenario.seed);
    let values: Vec<f64> = (1..=scenario.t_len)
        .map(|t| scenario.mean_at(t as f64) + noise.next_gaussian())
        .collect();
    TimeSeries::univariate(values)
}

/// Detection method configuration shared by all experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub params: DetectorParams,
    pub measure: Measure,
}

/// Per-method outcome of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub method_name: String,
    pub scenario: SimulationScenario,
    pub replicates: usize,
    pub rmse: f64,
    /// Estimated changepoint per replicate, in replicate order.
    pub estimates: Vec<usize>,
}

impl ExperimentResult {
    fn from_estimates(
        method_name: &str,
        scenario: SimulationScenario,
        estimates: Vec<usize>,
    ) -> Self {
        let rmse = rmse(&estimates, scenario.cp);
        Self {
            method_name: method_name.to_string(),
            scenario,
            replicates: estimates.len(),
            rmse,
            estimates,
        }
    }
}

/// Root mean squared deviation of the estimates from the true changepoint.
pub fn rmse(estimates: &[usize], cp: usize) -> f64 {
    assert!(!estimates.is_empty());
    let mse = estimates
        .iter()
        .map(|&e| (e as f64 - cp as f64).powi(2))
        .sum::<f64>()
        / estimates.len() as f64;
    mse.sqrt()
}

/// Paired outcome: the entropy-based estimator vs the plain argmin of the
/// regularity curve on the same replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub proposed: ExperimentResult,
    pub base: ExperimentResult,
    pub snr: f64,
}

impl ComparisonResult {
    /// Relative decrease in MSE of the proposed method vs the base one.
    pub fn mse_reduction(&self) -> f64 {
        1.0 - self.proposed.rmse.powi(2) / self.base.rmse.powi(2)
    }
}

/// Edge margin used by both estimators: where the two-sample windows are
/// truncated the curves carry no usable signal.
fn estimator_margin(params: &DetectorParams) -> usize {
    params.delta_reg
}

fn single_replicate(
    scenario: &SimulationScenario,
    config: &MethodConfig,
    reference: &detector::EntropyReference,
    replicate: usize,
) -> Result<(usize, usize)> {
    let mut scn = *scenario;
    scn.seed = scenario.seed.wrapping_add(replicate as u64);
    let series = gen_scenario(&scn)?;
    let regularity = regularity_curve(&series, config.params.delta_reg, &config.measure)?;
    // Base method: plain global argmin of the regularity curve.
    let base = detector::argmin(regularity.values());
    let curve = entropy_curve_from(&regularity, &config.params)?;
    let studentized = reference.studentize(curve.values());
    let proposed = detector::argmin_within(&studentized, estimator_margin(&config.params));
    Ok((proposed, base))
}

/// Runs `replicates` seeded replicates of the scenario and reports the RMSE
/// of both estimators. Replicates run in parallel; each owns its generator
/// stream, and aggregation is by replicate index, so the result does not
/// depend on scheduling.
pub fn monte_carlo_rmse(
    scenario: &SimulationScenario,
    config: &MethodConfig,
    replicates: usize,
) -> Result<ComparisonResult> {
    assert!(replicates >= 1, "replicates must be >= 1");
    scenario.validate()?;
    config.params.validate(scenario.t_len)?;
    let reference = detector::EntropyReference::new(&config.params, scenario.t_len)?;
    let pairs: Vec<(usize, usize)> = (0..replicates)
        .into_par_iter()
        .map(|r| single_replicate(scenario, config, &reference, r))
        .collect::<Result<_>>()?;
    let proposed: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let base: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    Ok(ComparisonResult {
        proposed: ExperimentResult::from_estimates("rough-fuzzy", *scenario, proposed),
        base: ExperimentResult::from_estimates(
            &format!("base-{}", config.measure.name()),
            *scenario,
            base,
        ),
        snr: scenario.snr(),
    })
}

/// Monte Carlo comparison for each jump size in `jumps`.
pub fn snr_sweep(
    jumps: &[f64],
    template: &SimulationScenario,
    config: &MethodConfig,
    replicates: usize,
) -> Result<Vec<ComparisonResult>> {
    jumps
        .iter()
        .map(|&jump| {
            let scn = SimulationScenario { jump, ..*template };
            monte_carlo_rmse(&scn, config, replicates)
        })
        .collect()
}

/// Monte Carlo comparison for each ramp half-width in `fuzziness_values`.
pub fn fuzziness_sweep(
    fuzziness_values: &[f64],
    template: &SimulationScenario,
    config: &MethodConfig,
    replicates: usize,
) -> Result<Vec<ComparisonResult>> {
    fuzziness_values
        .iter()
        .map(|&fuzziness| {
            let scn = SimulationScenario {
                fuzziness,
                ..*template
            };
            monte_carlo_rmse(&scn, config, replicates)
        })
        .collect()
}

/// One cell of the hyperparameter sensitivity grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub w: f64,
    pub big_delta: f64,
    pub rmse_proposed: f64,
    pub rmse_base: f64,
}

/// RMSE of the proposed estimator over the full `(w, Delta)` grid. The
/// replicate series and their regularity curves do not depend on `(w,
/// Delta)`, so they are generated once and shared across cells; the base
/// estimator is evaluated once on the same replicates.
pub fn sensitivity_grid(
    w_values: &[f64],
    delta_values: &[f64],
    scenario: &SimulationScenario,
    config: &MethodConfig,
    replicates: usize,
) -> Result<Vec<GridCell>> {
    assert!(replicates >= 1);
    scenario.validate()?;
    let curves: Vec<RegularityCurve> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut scn = *scenario;
            scn.seed = scenario.seed.wrapping_add(r as u64);
            let series = gen_scenario(&scn)?;
            regularity_curve(&series, config.params.delta_reg, &config.measure)
        })
        .collect::<Result<_>>()?;
    let base_estimates: Vec<usize> = curves
        .iter()
        .map(|c| detector::argmin(c.values()))
        .collect();
    let rmse_base = rmse(&base_estimates, scenario.cp);

    let mut cells = Vec::with_capacity(w_values.len() * delta_values.len());
    for &w in w_values {
        for &big_delta in delta_values {
            let params = DetectorParams {
                w,
                big_delta,
                ..config.params
            };
            params.validate(scenario.t_len)?;
            let margin = estimator_margin(&params);
            let reference = detector::EntropyReference::new(&params, scenario.t_len)?;
            let estimates: Vec<usize> = curves
                .par_iter()
                .map(|curve| {
                    let entropy = entropy_curve_from(curve, &params)?;
                    let studentized = reference.studentize(entropy.values());
                    Ok(detector::argmin_within(&studentized, margin))
                })
                .collect::<Result<Vec<usize>>>()?;
            cells.push(GridCell {
                w,
                big_delta,
                rmse_proposed: rmse(&estimates, scenario.cp),
                rmse_base,
            });
        }
    }
    Ok(cells)
}
