use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qfock::error::validate_q;
use qfock::operators::{
    verify_abs_m_squared_paths, verify_adjointness, verify_fm_identity, verify_lr_commutation,
    verify_qccr,
};
use qfock::oracle::{compare_moments, wick_moment, MatrixMoments, MomentMismatch, MomentQuery};
use qfock::spectral::{
    d0_threshold, gap_vs_bound_sweep, spectral_report, write_sweep_csv, write_threshold_csv,
    SpectralOptions, SweepPoint,
};
use qfock::{EigenSolver, Error, GramCache, LadderSet, Tolerances, TruncatedFock};

use crate::config::{high_condition_warnings, OutputFormat, RunConfig};
use crate::output::{
    emit, emit_json, Diagnostics, Envelope, Failure, Timer, ENVELOPE_FORMAT_VERSION,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;

fn status(passed: bool) -> u8 {
    if passed {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    }
}

fn options(cfg: &RunConfig) -> SpectralOptions {
    SpectralOptions {
        solver: cfg.eigensolver.clone(),
        tolerances: cfg.tolerances,
    }
}

fn gram_cache(cfg: &RunConfig) -> Option<GramCache> {
    cfg.cache_dir.as_ref().map(GramCache::new)
}

fn envelope<'a, T: Serialize>(
    command: &'static str,
    cfg: &'a RunConfig,
    warnings: Vec<String>,
    passed: bool,
    result: T,
    diagnostics: Diagnostics,
) -> Envelope<'a, T> {
    Envelope {
        format_version: ENVELOPE_FORMAT_VERSION,
        command,
        config: cfg,
        warnings,
        passed,
        result,
        diagnostics,
    }
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure(Error::Io(std::io::Error::other(e)));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| Failure(Error::Io(std::io::Error::other(e.to_string()))))
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    residual: f64,
    threshold: f64,
    passed: bool,
}

impl Check {
    fn new(name: &'static str, residual: f64, threshold: f64) -> Self {
        Self {
            name,
            residual,
            threshold,
            passed: residual <= threshold,
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyResult {
    checks: Vec<Check>,
    moment_order: usize,
    moment_tuples_checked: usize,
    moment_mismatches: Vec<MomentMismatch>,
}

pub fn verify(cfg: &RunConfig, out: Option<&Path>) -> Result<u8, Failure> {
    let warnings = cfg.validate_point()?;
    let timer = Timer::start();
    let cache = gram_cache(cfg);
    let (space, gram_cache) = TruncatedFock::with_cache(cfg.q, cfg.d, cfg.n_max, cache.as_ref())?;
    let ladders = LadderSet::new(&space)?;
    let tol = cfg.tolerances.identity;
    let moment_order = 6.min(2 * cfg.n_max);
    let moments = compare_moments(&space, moment_order, tol)?;
    let checks = vec![
        Check::new("qccr", verify_qccr(&space, &ladders), tol),
        Check::new(
            "lr_commutation",
            verify_lr_commutation(&space, &ladders)?,
            tol,
        ),
        Check::new("adjointness", verify_adjointness(&space, &ladders), tol),
        Check::new("fm_identity", verify_fm_identity(&space, &ladders)?, tol),
        Check::new(
            "abs_m_squared_paths",
            verify_abs_m_squared_paths(&space, &ladders)?,
            tol,
        ),
        Check::new("vacuum_moments", moments.max_abs_diff, tol),
    ];
    let passed = checks.iter().all(|c| c.passed);
    let diagnostics = Diagnostics {
        elapsed_ms: timer.elapsed_ms(),
        gram_cache,
        ..Diagnostics::default()
    };
    match cfg.format {
        OutputFormat::Json => {
            let result = VerifyResult {
                checks,
                moment_order,
                moment_tuples_checked: moments.tuples_checked,
                moment_mismatches: moments.mismatches,
            };
            emit_json(
                &envelope("verify", cfg, warnings, passed, result, diagnostics),
                out,
            )?;
        }
        OutputFormat::Csv => {
            let rows = checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.to_string(),
                        c.residual.to_string(),
                        c.threshold.to_string(),
                        c.passed.to_string(),
                    ]
                })
                .collect();
            emit(
                &csv_bytes(&["check", "residual", "threshold", "passed"], rows)?,
                out,
            )?;
        }
    }
    Ok(status(passed))
}

pub fn gap(cfg: &RunConfig, out: Option<&Path>) -> Result<u8, Failure> {
    let warnings = cfg.validate_point()?;
    let timer = Timer::start();
    let cache = gram_cache(cfg);
    let (space, gram_cache) = TruncatedFock::with_cache(cfg.q, cfg.d, cfg.n_max, cache.as_ref())?;
    let report = spectral_report(&space, &options(cfg))?;
    let passed = report.checks_pass();
    let diagnostics = Diagnostics {
        elapsed_ms: timer.elapsed_ms(),
        gram_cache,
        ..Diagnostics::default()
    };
    match cfg.format {
        OutputFormat::Json => {
            emit_json(
                &envelope("gap", cfg, warnings, passed, report, diagnostics),
                out,
            )?;
        }
        OutputFormat::Csv => {
            let point = SweepPoint {
                q: cfg.q,
                d: cfg.d,
                n_max: cfg.n_max,
                report: Some(report),
                error: None,
            };
            let mut buf = Vec::new();
            write_sweep_csv(&[point], &mut buf)?;
            emit(&buf, out)?;
        }
    }
    Ok(status(passed))
}

pub fn d0(cfg: &RunConfig, out: Option<&Path>) -> Result<u8, Failure> {
    cfg.validate_numerics()?;
    let settings = &cfg.threshold;
    for &q in &settings.q {
        validate_q(q)?;
    }
    if settings.probe.d == 0 || settings.probe.n_max == 0 {
        return Err(Error::invalid("the probe space needs d >= 1 and N >= 1").into());
    }
    let warnings = high_condition_warnings(&settings.q);
    let timer = Timer::start();
    let cache = gram_cache(cfg);
    let reports = settings
        .q
        .iter()
        .map(|&q| {
            d0_threshold(
                q,
                settings.mode,
                settings.probe,
                &cfg.eigensolver,
                cache.as_ref(),
            )
        })
        .collect::<qfock::Result<Vec<_>>>()?;
    let diagnostics = Diagnostics {
        elapsed_ms: timer.elapsed_ms(),
        ..Diagnostics::default()
    };
    match cfg.format {
        OutputFormat::Json => {
            emit_json(
                &envelope("d0", cfg, warnings, true, reports, diagnostics),
                out,
            )?;
        }
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_threshold_csv(&reports, &mut buf)?;
            emit(&buf, out)?;
        }
    }
    Ok(EXIT_OK)
}

/// Settings that change a sweep point's numbers; stored points computed
/// under different settings are recomputed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PointSettings {
    tolerances: Tolerances,
    eigensolver: EigenSolver,
}

#[derive(Debug, Serialize, Deserialize)]
struct StoredPoint {
    settings: PointSettings,
    point: SweepPoint,
}

fn point_path(dir: &Path, q: f64, d: usize, n: usize) -> PathBuf {
    dir.join(format!("point_q{:016x}_d{d}_N{n}.json", q.to_bits()))
}

fn load_point(path: &Path, settings: &PointSettings) -> Option<SweepPoint> {
    let bytes = std::fs::read(path).ok()?;
    match serde_json::from_slice::<StoredPoint>(&bytes) {
        Ok(stored) if &stored.settings == settings && stored.point.report.is_some() => {
            Some(stored.point)
        }
        Ok(_) => None,
        Err(e) => {
            log::warn!("ignoring unreadable sweep point {}: {e}", path.display());
            None
        }
    }
}

pub fn sweep(cfg: &RunConfig, out: Option<&Path>) -> Result<u8, Failure> {
    cfg.validate_numerics()?;
    for &q in &cfg.sweep.q {
        validate_q(q)?;
    }
    if cfg.sweep.d.contains(&0) {
        return Err(Error::invalid("sweep d values must be at least 1").into());
    }
    if let Some(&n) = cfg.sweep.n.iter().find(|&&n| n < 2) {
        return Err(Error::invalid(format!("sweep N values must be at least 2, got {n}")).into());
    }
    let warnings = high_condition_warnings(&cfg.sweep.q);
    let timer = Timer::start();
    let settings = PointSettings {
        tolerances: cfg.tolerances,
        eigensolver: cfg.eigensolver.clone(),
    };
    let points = cfg.sweep.points();
    let point_dir = cfg.cache_dir.as_ref().map(|c| c.join("sweep"));

    let mut slots: Vec<Option<SweepPoint>> = points
        .iter()
        .map(|&(q, d, n)| {
            point_dir
                .as_ref()
                .and_then(|dir| load_point(&point_path(dir, q, d, n), &settings))
        })
        .collect();
    let resumed = slots.iter().filter(|s| s.is_some()).count();
    let todo: Vec<(f64, usize, usize)> = points
        .iter()
        .zip(&slots)
        .filter(|(_, s)| s.is_none())
        .map(|(&p, _)| p)
        .collect();

    let cache = gram_cache(cfg);
    let fresh = gap_vs_bound_sweep(&todo, &options(cfg), cache.as_ref());
    if let Some(dir) = &point_dir {
        for p in fresh.iter().filter(|p| p.report.is_some()) {
            let stored = StoredPoint {
                settings: settings.clone(),
                point: p.clone(),
            };
            let bytes = serde_json::to_vec(&stored)
                .map_err(|e| Failure(Error::Io(std::io::Error::other(e))))?;
            qfock::fock::cache::write_atomic(&point_path(dir, p.q, p.d, p.n_max), &bytes)?;
        }
    }
    let computed = fresh.len();
    let mut fresh = fresh.into_iter();
    for slot in slots.iter_mut().filter(|s| s.is_none()) {
        *slot = fresh.next();
    }
    let table: Vec<SweepPoint> = slots
        .into_iter()
        .map(|s| s.expect("every point filled"))
        .collect();

    let all_failed = !table.is_empty() && table.iter().all(|p| p.report.is_none());
    let checks_pass = table
        .iter()
        .filter_map(|p| p.report.as_ref())
        .all(|r| r.checks_pass());
    for p in table.iter().filter(|p| p.error.is_some()) {
        log::warn!(
            "sweep point q={} d={} N={} failed: {}",
            p.q,
            p.d,
            p.n_max,
            p.error.as_deref().unwrap_or("")
        );
    }
    let diagnostics = Diagnostics {
        elapsed_ms: timer.elapsed_ms(),
        points_resumed: Some(resumed),
        points_computed: Some(computed),
        ..Diagnostics::default()
    };
    let passed = checks_pass && !all_failed;
    match cfg.format {
        OutputFormat::Json => {
            emit_json(
                &envelope("sweep", cfg, warnings, passed, &table, diagnostics),
                out,
            )?;
        }
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&table, &mut buf)?;
            emit(&buf, out)?;
        }
    }
    Ok(if all_failed {
        EXIT_NUMERIC
    } else {
        status(checks_pass)
    })
}

#[derive(Debug, Serialize)]
struct SingleMoment {
    indices: Vec<usize>,
    wick: f64,
    matrix: f64,
}

pub fn moments(
    cfg: &RunConfig,
    indices: Option<Vec<usize>>,
    max_order: Option<usize>,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let warnings = cfg.validate_point()?;
    let timer = Timer::start();
    let cache = gram_cache(cfg);
    let (space, gram_cache) = TruncatedFock::with_cache(cfg.q, cfg.d, cfg.n_max, cache.as_ref())?;
    let tol = cfg.tolerances.identity;
    let diagnostics = |gram_cache| Diagnostics {
        elapsed_ms: timer.elapsed_ms(),
        gram_cache,
        ..Diagnostics::default()
    };

    if let Some(indices) = indices {
        let query = MomentQuery::new(indices, cfg.d)?;
        let matrix = MatrixMoments::new(&space)?.moment(&query)?;
        let wick = wick_moment(&query, cfg.q)?;
        let passed = (wick - matrix).abs() <= tol;
        match cfg.format {
            OutputFormat::Json => {
                let result = SingleMoment {
                    indices: query.indices,
                    wick,
                    matrix,
                };
                emit_json(
                    &envelope(
                        "moments",
                        cfg,
                        warnings,
                        passed,
                        result,
                        diagnostics(gram_cache),
                    ),
                    out,
                )?;
            }
            OutputFormat::Csv => {
                let joined = query
                    .indices
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                let rows = vec![vec![joined, wick.to_string(), matrix.to_string()]];
                emit(&csv_bytes(&["indices", "wick", "matrix"], rows)?, out)?;
            }
        }
        return Ok(status(passed));
    }

    let order = max_order.unwrap_or(6.min(2 * cfg.n_max));
    let comparison = compare_moments(&space, order, tol)?;
    let passed = comparison.passed();
    match cfg.format {
        OutputFormat::Json => {
            emit_json(
                &envelope(
                    "moments",
                    cfg,
                    warnings,
                    passed,
                    &comparison,
                    diagnostics(gram_cache),
                ),
                out,
            )?;
        }
        OutputFormat::Csv => {
            let rows = vec![vec![
                comparison.q.to_string(),
                comparison.d.to_string(),
                comparison.max_order.to_string(),
                comparison.tuples_checked.to_string(),
                comparison.max_abs_diff.to_string(),
                comparison.mismatches.len().to_string(),
            ]];
            let header = [
                "q",
                "d",
                "max_order",
                "tuples_checked",
                "max_abs_diff",
                "mismatches",
            ];
            emit(&csv_bytes(&header, rows)?, out)?;
        }
    }
    Ok(status(passed))
}
