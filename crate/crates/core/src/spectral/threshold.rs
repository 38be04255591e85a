use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{validate_q, Error, Result};
use crate::fock::{GramCache, TruncatedFock};
use crate::linalg::EigenSolver;

/// Largest `d` examined by the threshold scan.
pub const D0_SCAN_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMode {
    /// Both constants from a truncated probe space.
    #[serde(rename = "empirical-constants")]
    EmpiricalConstants,
    /// `C1 = (1 − |q|)^{-1/2}`, `C2` from the probe.
    #[serde(rename = "analytic-C1-only")]
    AnalyticC1Only,
}

/// The truncation on which empirical constants are measured.
///
/// The Gram matrices split into blocks by letter content, and a level-`N`
/// word uses at most `N` distinct letters, so `d = N` already realises
/// every block the constants see.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdProbe {
    pub d: usize,
    #[serde(rename = "N")]
    pub n_max: usize,
}

impl Default for ThresholdProbe {
    fn default() -> Self {
        Self { d: 4, n_max: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub q: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub d0: usize,
    pub mode: ThresholdMode,
    pub probe: ThresholdProbe,
}

fn condition_holds(d: usize, c1: f64, c2: f64) -> bool {
    let d = d as f64;
    (d - c1 * c2) / (c2 * d.sqrt()) > 2.0 * c1
}

/// Least `d ≥ 1` with `(d − C1·C2)/(C2·√d) > 2·C1`, by direct scan.
pub fn d0_from_constants(c1: f64, c2: f64) -> Result<usize> {
    if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0) {
        return Err(Error::invalid(format!(
            "constants must be finite and positive, got C1 = {c1}, C2 = {c2}"
        )));
    }
    (1..=D0_SCAN_LIMIT)
        .find(|&d| condition_holds(d, c1, c2))
        .ok_or(Error::ThresholdNotFound {
            limit: D0_SCAN_LIMIT,
        })
}

pub fn d0_threshold(
    q: f64,
    mode: ThresholdMode,
    probe: ThresholdProbe,
    solver: &EigenSolver,
    cache: Option<&GramCache>,
) -> Result<ThresholdReport> {
    validate_q(q)?;
    let (space, _) = TruncatedFock::with_cache(q, probe.d, probe.n_max, cache)?;
    let constants = space.empirical_constants(solver)?;
    let c1 = match mode {
        ThresholdMode::EmpiricalConstants => constants.c1,
        ThresholdMode::AnalyticC1Only => (1.0 - q.abs()).powf(-0.5),
    };
    let c2 = constants.c2;
    Ok(ThresholdReport {
        q,
        c1,
        c2,
        d0: d0_from_constants(c1, c2)?,
        mode,
        probe,
    })
}

/// CSV with columns `q,C1,C2,d0`; the header is written even for no rows.
pub fn write_threshold_csv<W: Write>(reports: &[ThresholdReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["q", "C1", "C2", "d0"]).map_err(csv_error)?;
    for r in reports {
        w.write_record([
            r.q.to_string(),
            r.c1.to_string(),
            r.c2.to_string(),
            r.d0.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}
