//! Changepoint report and its JSON serialization.
//!
//! The JSON encoding is deterministic: fields appear in declaration order
//! and every real is rendered with 17 significant digits (`{:.16e}`), which
//! round-trips `f64` exactly. Writing a parsed report back out reproduces
//! the file byte for byte.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::DetectorParams;

/// One screened candidate changepoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// 1-based time index of the candidate.
    pub s: usize,
    /// Ambiguity entropy at the candidate.
    pub entropy: f64,
    /// Null-hypothesis entropy at the candidate.
    pub h_star: f64,
    /// Estimated variance of the screening statistic (clamped at 0).
    pub sigma_star: f64,
    /// Screening z-score; absent when the variance degenerated.
    pub z: Option<f64>,
    /// Whether the candidate passed the one-sided screen.
    pub accepted: bool,
    /// Set when `sigma_star <= 0` made the z-score undefined.
    pub degenerate: bool,
}

/// Full detection output: screened candidates plus the configuration and
/// null parameters they were screened under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointReport {
    pub candidates: Vec<Candidate>,
    pub params: DetectorParams,
    pub measure_name: String,
    /// Null mean of the regularity curve used by the screen.
    pub null_mu: f64,
    /// Normalizing rate `a_delta` used by the screen.
    pub normalizer: f64,
}

impl ChangepointReport {
    /// Checks the report invariants: candidates sorted ascending by `s`,
    /// nonnegative variances.
    pub fn validate(&self) -> Result<()> {
        for pair in self.candidates.windows(2) {
            if pair[0].s >= pair[1].s {
                return Err(Error::InvalidReport(format!(
                    "candidates not sorted: s={} before s={}",
                    pair[0].s, pair[1].s
                )));
            }
        }
        if let Some(c) = self.candidates.iter().find(|c| c.sigma_star < 0.0) {
            return Err(Error::InvalidReport(format!(
                "negative sigma_star at s={}",
                c.s
            )));
        }
        Ok(())
    }

    /// Deterministic JSON encoding (see module docs).
    pub fn to_json_string(&self) -> Result<String> {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter::new());
        self.serialize(&mut ser)?;
        out.push(b'\n');
        Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Validates and writes the JSON document to `path`.
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        self.validate()?;
        let path = path.as_ref();
        fs::write(path, self.to_json_string()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// CSV rendering of the candidate table (header + one row per candidate).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("s,entropy,h_star,sigma_star,z,accepted,degenerate\n");
        for c in &self.candidates {
            let z = c.z.map(|z| z.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.s, c.entropy, c.h_star, c.sigma_star, z, c.accepted, c.degenerate
            ));
        }
        out
    }
}

/// Compact JSON formatter that pins floats to 17 significant digits.
struct SigDigitFormatter {
    inner: serde_json::ser::CompactFormatter,
}

impl SigDigitFormatter {
    fn new() -> Self {
        Self {
            inner: serde_json::ser::CompactFormatter,
        }
    }
}

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        serde_json::ser::Formatter::write_f32(&mut self.inner, writer, value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn sample_report() -> ChangepointReport {
        ChangepointReport {
            candidates: vec![
                Candidate {
                    s: 300,
                    entropy: 1.234567890123,
                    h_star: 1.3,
                    sigma_star: 0.05,
                    z: Some(-2.5),
                    accepted: true,
                    degenerate: false,
                },
                Candidate {
                    s: 700,
                    entropy: 1.9,
                    h_star: 1.8,
                    sigma_star: 0.0,
                    z: None,
                    accepted: false,
                    degenerate: true,
                },
            ],
            params: DetectorParams {
                delta_reg: 50,
                big_delta: 50.0,
                w: 50.0,
                beta: E,
                alpha: 0.05,
            },
            measure_name: "ks".into(),
            null_mu: 0.9123,
            normalizer: 50f64.sqrt(),
        }
    }

    #[test]
    fn json_round_trips_to_identical_bytes() {
        let report = sample_report();
        let first = report.to_json_string().unwrap();
        let parsed = ChangepointReport::from_json_str(&first).unwrap();
        assert_eq!(parsed, report);
        let second = parsed.to_json_string().unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn empty_candidate_list_serializes() {
        let mut report = sample_report();
        report.candidates.clear();
        let json = report.to_json_string().unwrap();
        assert!(json.contains("\"candidates\":[]"), "json: {json}");
    }

    #[test]
    fn accepted_flag_appears() {
        let json = sample_report().to_json_string().unwrap();
        assert!(json.contains("\"accepted\":true"));
        assert!(json.contains("\"z\":null"));
    }

    #[test]
    fn floats_carry_17_significant_digits() {
        let json = sample_report().to_json_string().unwrap();
        // 17 significant digits of the f64 nearest 0.05.
        assert!(json.contains("\"alpha\":5.0000000000000003e-2"), "json: {json}");
        assert!(json.contains("\"big_delta\":5.0000000000000000e1"), "json: {json}");
    }

    #[test]
    fn write_rejects_unsorted_candidates() {
        let mut report = sample_report();
        report.candidates.swap(0, 1);
        let dir = tempfile::tempdir().unwrap();
        let err = report.write_json(dir.path().join("r.json")).unwrap_err();
        assert!(matches!(err, Error::InvalidReport(_)));
    }

    #[test]
    fn file_round_trip_is_byte_identical() {
        let report = sample_report();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        report.write_json(&path).unwrap();
        let bytes_first = fs::read(&path).unwrap();
        let parsed = ChangepointReport::read_json(&path).unwrap();
        parsed.write_json(&path).unwrap();
        assert_eq!(bytes_first, fs::read(&path).unwrap());
    }
}
