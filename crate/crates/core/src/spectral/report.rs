use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::Result;
use crate::fock::{EmpiricalConstants, TruncatedFock};
use crate::linalg::{transport, EigExtremes, EigenSolver};
use crate::operators::{
    abs_m_squared, build_contraction, build_cyclic_shift, build_m, build_m_dagger, FockOperator,
    LadderSet,
};

/// Bumped whenever a serialized field changes meaning or name.
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Extremal eigenvalues of a symmetric matrix with residuals.
pub fn sym_eig_extremes(a: &DMatrix<f64>, solver: &EigenSolver) -> Result<EigExtremes> {
    solver.extremes(a)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralOptions {
    pub solver: EigenSolver,
    pub tolerances: Tolerances,
}

fn transported_block(
    op: &FockOperator,
    space: &TruncatedFock,
    out: usize,
    inp: usize,
) -> Option<DMatrix<f64>> {
    op.block(out, inp).map(|b| {
        transport(
            b,
            space.factor(op.codomain(), out),
            space.factor(op.domain(), inp),
        )
    })
}

/// Largest singular value of each input level of a level-diagonal
/// operator (one output level per input level), in q-orthonormal
/// coordinates.
fn per_level_max_sv(
    op: &FockOperator,
    space: &TruncatedFock,
    levels: impl Iterator<Item = (usize, usize)>,
    solver: &EigenSolver,
) -> Result<Vec<(usize, f64)>> {
    levels
        .map(|(out, inp)| {
            let sv = match transported_block(op, space, out, inp) {
                Some(b) => solver.max_singular_value(&b)?,
                None => 0.0,
            };
            Ok((inp, sv))
        })
        .collect()
}

fn max_of(rows: &[(usize, f64)]) -> f64 {
    rows.iter().map(|&(_, v)| v).fold(0.0, f64::max)
}

fn norm_of_m_levels(
    space: &TruncatedFock,
    ladders: &LadderSet,
    solver: &EigenSolver,
) -> Result<Vec<(usize, f64)>> {
    let m = build_m(ladders)?;
    per_level_max_sv(&m, space, (1..=space.n_max()).map(|n| (n - 1, n)), solver)
}

/// `‖m‖` on `F⁺_N`. `m` lowers degree by exactly one, so its norm is the
/// largest per-level norm.
pub fn norm_of_m(space: &TruncatedFock, ladders: &LadderSet, solver: &EigenSolver) -> Result<f64> {
    Ok(max_of(&norm_of_m_levels(space, ladders, solver)?))
}

fn min_sv_of_mdag_levels(
    space: &TruncatedFock,
    ladders: &LadderSet,
    solver: &EigenSolver,
) -> Result<Vec<(usize, f64)>> {
    let mdag = build_m_dagger(ladders)?;
    (1..space.n_max())
        .map(|n| {
            let sv = match transported_block(&mdag, space, n + 1, n) {
                Some(b) => solver.min_singular_value(&b)?,
                None => 0.0,
            };
            Ok((n, sv))
        })
        .collect()
}

/// Smallest singular value of `m†` on `F⁺_{N−1}`, where its images are
/// resolved exactly. `m†` raises degree by one, so the images of different
/// levels are orthogonal and the minimum is taken level by level.
pub fn min_sv_of_mdag(
    space: &TruncatedFock,
    ladders: &LadderSet,
    solver: &EigenSolver,
) -> Result<f64> {
    Ok(min_sv_of_mdag_levels(space, ladders, solver)?
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min))
}

/// The lower bound `(d − C1·C2)/(C2·√d)` for the smallest singular value of `m†`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdagBound {
    pub value: f64,
    /// The bound is not positive and therefore asserts nothing.
    pub vacuous: bool,
}

impl MdagBound {
    pub fn new(d: usize, c1: f64, c2: f64) -> Self {
        let d = d as f64;
        let value = (d - c1 * c2) / (c2 * d.sqrt());
        Self {
            value,
            vacuous: value <= 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    /// `sqrt(max(λ_min, 0))` of the `|M|²` compression on `F⁺_{N−1}`.
    pub gap: f64,
    pub lambda_min: f64,
    /// Largest of the vacuum diagonal entry and the vacuum row norm.
    pub vacuum_residual: f64,
    pub eigen_residual: f64,
}

pub fn gap(space: &TruncatedFock, ladders: &LadderSet, solver: &EigenSolver) -> Result<GapResult> {
    let form = abs_m_squared(space, ladders)?;
    let e = solver.extremes(&form.positive_part())?;
    Ok(GapResult {
        gap: e.min.max(0.0).sqrt(),
        lambda_min: e.min,
        vacuum_residual: form.vacuum_residual(),
        eigen_residual: e.min_residual,
    })
}

fn shift_levels(space: &TruncatedFock, solver: &EigenSolver) -> Result<Vec<(usize, f64)>> {
    let s = build_cyclic_shift(space);
    per_level_max_sv(&s, space, (1..=space.n_max()).map(|n| (n, n)), solver)
}

fn contraction_levels(space: &TruncatedFock, solver: &EigenSolver) -> Result<Vec<(usize, f64)>> {
    let f = build_contraction(space);
    per_level_max_sv(&f, space, (1..=space.n_max()).map(|n| (n - 1, n)), solver)
}

/// `‖S‖` on `F⁺_N` in the q-geometry.
pub fn shift_norm(space: &TruncatedFock, solver: &EigenSolver) -> Result<f64> {
    Ok(max_of(&shift_levels(space, solver)?))
}

/// `‖f‖` on `H ⊗ F⁺_N`.
pub fn contraction_norm(space: &TruncatedFock, solver: &EigenSolver) -> Result<f64> {
    Ok(max_of(&contraction_levels(space, solver)?))
}

/// Per-level quantities. Columns that do not apply at a level are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: usize,
    /// `‖j‖` and `‖j⁻¹‖` at this level, left and right inclusions (`level < N`).
    pub j_left: Option<f64>,
    pub j_left_inverse: Option<f64>,
    pub j_right: Option<f64>,
    pub j_right_inverse: Option<f64>,
    pub m_norm: Option<f64>,
    pub mdag_min_sv: Option<f64>,
    pub s_norm: Option<f64>,
    pub f_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub format_version: u32,
    pub q: f64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n_max: usize,
    pub c1_emp: f64,
    pub c2_emp: f64,
    pub m_norm: f64,
    pub m_norm_bound: f64,
    pub mdag_min_sv: f64,
    pub mdag_bound: MdagBound,
    pub gap: f64,
    pub gap_lambda_min: f64,
    /// `min_sv(m†) − ‖m‖` when positive.
    pub gap_lower_bound: Option<f64>,
    pub vacuum_residual: f64,
    pub s_norm: f64,
    pub s_bound: f64,
    pub f_norm: f64,
    pub f_bound: f64,
    /// `‖m‖ ≤ 2·C1`.
    pub m_norm_bound_ok: bool,
    /// `min_sv(m†) ≥ (d − C1·C2)/(C2·√d)`, or the bound is vacuous.
    pub mdag_lower_bound_ok: bool,
    pub s_bound_ok: bool,
    pub f_bound_ok: bool,
    pub vacuum_kernel_ok: bool,
    pub gap_positive: bool,
    /// `gap ≥ min_sv(m†) − ‖m‖` whenever the right side is positive.
    pub triangle_ok: bool,
    pub per_level: Vec<LevelRow>,
}

impl SpectralReport {
    /// All inequality and kernel checks hold. Gap positivity is reported
    /// but not required: below `d₀` nothing asserts it.
    pub fn checks_pass(&self) -> bool {
        self.m_norm_bound_ok
            && self.mdag_lower_bound_ok
            && self.s_bound_ok
            && self.f_bound_ok
            && self.vacuum_kernel_ok
            && self.triangle_ok
    }
}

/// Vacuum kernel entries must vanish to this absolute level.
const VACUUM_TOL: f64 = 1e-12;

/// Runs the full spectral pipeline on one truncation (`N ≥ 2`).
pub fn spectral_report(space: &TruncatedFock, options: &SpectralOptions) -> Result<SpectralReport> {
    let solver = &options.solver;
    let slack = options.tolerances.inequality;
    let (d, n_max) = (space.d(), space.n_max());
    let ladders = LadderSet::new(space)?;

    let EmpiricalConstants {
        c1,
        c2,
        per_level: j,
    } = space.empirical_constants(solver)?;
    let m_levels = norm_of_m_levels(space, &ladders, solver)?;
    let mdag_levels = min_sv_of_mdag_levels(space, &ladders, solver)?;
    let s_levels = shift_levels(space, solver)?;
    let f_levels = contraction_levels(space, solver)?;
    let gap = gap(space, &ladders, solver)?;

    let m_norm = max_of(&m_levels);
    let mdag_min_sv = mdag_levels
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    let mdag_bound = MdagBound::new(d, c1, c2);
    let (s_norm, f_norm) = (max_of(&s_levels), max_of(&f_levels));
    let (s_bound, f_bound) = (c1 * c2, c2 * (d as f64).sqrt());
    let gap_lower_bound = Some(mdag_min_sv - m_norm).filter(|&b| b > 0.0);

    let lookup = |rows: &[(usize, f64)], n: usize| rows.iter().find(|r| r.0 == n).map(|r| r.1);
    let per_level = (0..=n_max)
        .map(|n| {
            let jn = j.iter().find(|x| x.level == n);
            LevelRow {
                level: n,
                j_left: jn.map(|x| x.left.norm),
                j_left_inverse: jn.map(|x| x.left.inverse_norm),
                j_right: jn.map(|x| x.right.norm),
                j_right_inverse: jn.map(|x| x.right.inverse_norm),
                m_norm: lookup(&m_levels, n),
                mdag_min_sv: lookup(&mdag_levels, n),
                s_norm: lookup(&s_levels, n),
                f_norm: lookup(&f_levels, n),
            }
        })
        .collect();

    Ok(SpectralReport {
        format_version: REPORT_FORMAT_VERSION,
        q: space.q(),
        d,
        n_max,
        c1_emp: c1,
        c2_emp: c2,
        m_norm,
        m_norm_bound: 2.0 * c1,
        mdag_min_sv,
        mdag_bound,
        gap: gap.gap,
        gap_lambda_min: gap.lambda_min,
        gap_lower_bound,
        vacuum_residual: gap.vacuum_residual,
        s_norm,
        s_bound,
        f_norm,
        f_bound,
        m_norm_bound_ok: m_norm <= 2.0 * c1 + slack,
        mdag_lower_bound_ok: mdag_bound.vacuous || mdag_min_sv >= mdag_bound.value - slack,
        s_bound_ok: s_norm <= s_bound + slack,
        f_bound_ok: f_norm <= f_bound + slack,
        vacuum_kernel_ok: gap.vacuum_residual < VACUUM_TOL,
        gap_positive: gap.lambda_min > slack,
        triangle_ok: gap_lower_bound.is_none_or(|b| gap.gap >= b - slack),
        per_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(q: f64, d: usize, n: usize) -> SpectralReport {
        let space = TruncatedFock::new(q, d, n).unwrap();
        spectral_report(&space, &SpectralOptions::default()).unwrap()
    }

    #[test]
    fn eig_extremes_examples() {
        let solver = EigenSolver::default();
        let e = sym_eig_extremes(&DMatrix::identity(3, 3), &solver).unwrap();
        assert!((e.min - 1.0).abs() < 1e-14 && (e.max - 1.0).abs() < 1e-14);
        let e = sym_eig_extremes(
            &DMatrix::from_diagonal(&nalgebra::dvector![0.5, 1.5]),
            &solver,
        )
        .unwrap();
        assert!((e.min - 0.5).abs() < 1e-14 && (e.max - 1.5).abs() < 1e-14);
        let p2 = crate::fock::build_symmetrizer(2, 2, 0.5).unwrap();
        let e = sym_eig_extremes(&p2, &solver).unwrap();
        assert!((e.min - 0.5).abs() < 1e-12 && (e.max - 1.5).abs() < 1e-12);
    }

    #[test]
    fn free_case_constants_are_one() {
        let r = report(0.0, 2, 3);
        assert!((r.c1_emp - 1.0).abs() < 1e-12 && (r.c2_emp - 1.0).abs() < 1e-12);
        assert!(r.m_norm <= 2.0 + 1e-9);
        assert!(r.mdag_min_sv >= (2.0 - 1.0) / 2f64.sqrt() - 1e-9);
        assert!(r.checks_pass());
    }

    #[test]
    fn single_generator_has_zero_gap() {
        // With d = 1 left and right operators coincide, so M = 0.
        let r = report(0.3, 1, 3);
        assert!(r.gap.abs() < 1e-7);
        assert!(!r.gap_positive);
        assert!(r.mdag_bound.vacuous);
    }

    #[test]
    fn free_single_generator_m_norm_anchor() {
        // d = 1, q = 0: m = l − r is zero, since both remove the one letter.
        let r = report(0.0, 1, 4);
        assert!(r.m_norm < 1e-12);
    }

    #[test]
    fn gap_does_not_increase_with_truncation() {
        let a = report(0.2, 3, 2);
        let b = report(0.2, 3, 3);
        assert!(b.gap <= a.gap + 1e-9);
        assert!(b.m_norm >= a.m_norm - 1e-12);
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = report(-0.4, 2, 2);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"N\":2"));
        let back: SpectralReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
