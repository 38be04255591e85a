use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{spectral_report, SpectralOptions, SpectralReport};
use super::threshold::csv_error;
use crate::error::Result;
use crate::fock::{GramCache, TruncatedFock};

/// A Cartesian product of `q`, `d` and `N` values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub q: Vec<f64>,
    pub d: Vec<usize>,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
}

impl SweepGrid {
    /// Points in `q`-major, then `d`, then `N` order.
    pub fn points(&self) -> Vec<(f64, usize, usize)> {
        let mut out = Vec::with_capacity(self.q.len() * self.d.len() * self.n.len());
        for &q in &self.q {
            for &d in &self.d {
                for &n in &self.n {
                    out.push((q, d, n));
                }
            }
        }
        out
    }
}

/// One grid point: either a report or the error that stopped it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub q: f64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n_max: usize,
    pub report: Option<SpectralReport>,
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn run(
        q: f64,
        d: usize,
        n_max: usize,
        options: &SpectralOptions,
        cache: Option<&GramCache>,
    ) -> Self {
        let result = TruncatedFock::with_cache(q, d, n_max, cache)
            .and_then(|(space, _)| spectral_report(&space, options));
        match result {
            Ok(report) => Self {
                q,
                d,
                n_max,
                report: Some(report),
                error: None,
            },
            Err(e) => Self {
                q,
                d,
                n_max,
                report: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Runs every point independently; failures are recorded, not propagated.
/// The output order follows `points`.
pub fn gap_vs_bound_sweep(
    points: &[(f64, usize, usize)],
    options: &SpectralOptions,
    cache: Option<&GramCache>,
) -> Vec<SweepPoint> {
    points
        .par_iter()
        .map(|&(q, d, n)| SweepPoint::run(q, d, n, options, cache))
        .collect()
}

const SWEEP_COLUMNS: [&str; 17] = [
    "q",
    "d",
    "N",
    "c1_emp",
    "c2_emp",
    "m_norm",
    "mdag_min_sv",
    "mdag_bound",
    "gap",
    "vacuum_residual",
    "s_norm",
    "f_norm",
    "m_norm_bound_ok",
    "mdag_lower_bound_ok",
    "gap_positive",
    "triangle_ok",
    "error",
];

/// One CSV row per point; report columns are empty for failed points.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS).map_err(csv_error)?;
    for p in points {
        let mut row = vec![p.q.to_string(), p.d.to_string(), p.n_max.to_string()];
        match &p.report {
            Some(r) => row.extend([
                r.c1_emp.to_string(),
                r.c2_emp.to_string(),
                r.m_norm.to_string(),
                r.mdag_min_sv.to_string(),
                r.mdag_bound.value.to_string(),
                r.gap.to_string(),
                r.vacuum_residual.to_string(),
                r.s_norm.to_string(),
                r.f_norm.to_string(),
                r.m_norm_bound_ok.to_string(),
                r.mdag_lower_bound_ok.to_string(),
                r.gap_positive.to_string(),
                r.triangle_ok.to_string(),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 13)),
        }
        row.push(p.error.clone().unwrap_or_default());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_are_recorded_per_point() {
        let points = [(0.0, 2, 2), (1.5, 2, 2), (0.0, 2, 1)];
        let out = gap_vs_bound_sweep(&points, &SpectralOptions::default(), None);
        assert_eq!(out.len(), 3);
        assert!(out[0].report.is_some());
        assert!(out[1].error.as_deref().unwrap().contains("q = 1.5"));
        assert!(out[2].error.is_some());
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let grid = SweepGrid {
            q: vec![-0.3, 0.0, 0.3],
            d: vec![1, 2],
            n: vec![2, 3],
        };
        let out = gap_vs_bound_sweep(&grid.points(), &SpectralOptions::default(), None);
        let mut buf = Vec::new();
        write_sweep_csv(&out, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 13);
        assert!(text.starts_with("q,d,N,"));
    }
}
