//! Offline detection of gradual changepoints in time series.
//!
//! The pipeline: a sliding-window two-sample statistic is turned into a
//! regularity curve `R(t)`; for every candidate changepoint `s` the two
//! fuzzy partitions of the time axis are approximated from below and above
//! under a tolerance relation (closed forms in [`fuzzy`]); the
//! regularity-weighted roughness of those partitions yields an ambiguity
//! entropy curve ([`entropy`]) whose minima are the changepoint estimates,
//! screened by an asymptotic z-test ([`detector`]). [`sim`] contains a
//! seeded Monte Carlo harness benchmarking the entropy estimator against
//! the plain argmin of `R(t)`.

pub mod cli;
pub mod detector;
pub mod entropy;
pub mod error;
pub mod fuzzy;
pub mod regularity;
pub mod report;
pub mod series;
pub mod sim;

pub use detector::{detect_multiple, detect_single, DetectOptions, NullDistributionParams};
pub use entropy::{entropy_curve, EntropyCurve};
pub use error::{Error, Result};
pub use fuzzy::ApproximationProfile;
pub use regularity::{regularity_curve, Measure, RegularityCurve, TwoSampleMeasure};
pub use report::{Candidate, ChangepointReport};
pub use series::{load_csv, DetectorParams, TimeSeries};
pub use sim::{MethodConfig, ScenarioKind, SimulationScenario};
