//! Residuals of the algebraic identities the assembled operators must
//! satisfy. Every check is restricted to levels where clipping at `N`
//! cannot contaminate it, so each residual is a statement about the
//! untruncated operators.

use nalgebra::DMatrix;

use super::fock_operator::FockOperator;
use super::gap::{
    abs_m_squared, abs_m_squared_via_gaussians, build_contraction, build_cyclic_shift,
    build_gap_operator_in_basis, build_m_dagger,
};
use super::ladder::LadderSet;
use crate::error::{Error, Result};
use crate::fock::{SpaceKind, TruncatedFock};

fn residual(lhs: &FockOperator, rhs: &FockOperator) -> f64 {
    (lhs - rhs).max_abs()
}

/// `max_{i,j} ‖l_i l*_j − q l*_j l_i − δ_ij‖` (and the same for `r`) on
/// inputs of degree `≤ N−1`.
pub fn verify_qccr(space: &TruncatedFock, ladders: &LadderSet) -> f64 {
    let (d, top) = (space.d(), space.n_max().saturating_sub(1));
    let q = space.q();
    let id = FockOperator::identity(d, space.n_max(), SpaceKind::Fock, 0..=top);
    let mut worst = 0.0_f64;
    for (ann, cre) in [
        (&ladders.annihilation_left, &ladders.creation_left),
        (&ladders.annihilation_right, &ladders.creation_right),
    ] {
        for (i, a) in ann.iter().enumerate() {
            for (j, c) in cre.iter().enumerate() {
                let lhs = &(a * c) - &(&(c * a) * q);
                let lhs = lhs.restrict_input(0..=top);
                let rhs = if i == j {
                    id.clone()
                } else {
                    FockOperator::zero(d, space.n_max(), SpaceKind::Fock, SpaceKind::Fock)
                };
                worst = worst.max(residual(&lhs, &rhs));
            }
        }
    }
    worst
}

/// `max_{i,j} ‖[L_i, R_j]‖` on inputs of degree `≤ N−2`.
pub fn verify_lr_commutation(space: &TruncatedFock, ladders: &LadderSet) -> Result<f64> {
    if space.n_max() < 2 {
        return Err(Error::invalid("the [L, R] check needs N >= 2"));
    }
    let top = space.n_max() - 2;
    let d = space.d();
    let left: Vec<_> = (1..=d).map(|i| ladders.gaussian_left(i)).collect();
    let right: Vec<_> = (1..=d).map(|i| ladders.gaussian_right(i)).collect();
    let mut worst = 0.0_f64;
    for l in &left {
        for r in &right {
            let comm = &(l * r) - &(r * l);
            worst = worst.max(comm.restrict_input(0..=top).max_abs());
        }
    }
    Ok(worst)
}

/// Largest deviation between each transported annihilator and the
/// transpose of its transported creation partner.
pub fn verify_adjointness(space: &TruncatedFock, ladders: &LadderSet) -> f64 {
    let mut worst = 0.0_f64;
    for (ann, cre) in [
        (&ladders.annihilation_left, &ladders.creation_left),
        (&ladders.annihilation_right, &ladders.creation_right),
    ] {
        for (a, c) in ann.iter().zip(cre) {
            let a_t = a.transported(space);
            let c_t = c.transported(space).transpose();
            worst = worst.max(residual(&a_t, &c_t));
        }
    }
    worst
}

/// `‖f m† − (d − S)‖` on levels `1..=N−1`.
pub fn verify_fm_identity(space: &TruncatedFock, ladders: &LadderSet) -> Result<f64> {
    let n_max = space.n_max();
    if n_max < 2 {
        return Err(Error::invalid("the f m† identity needs N >= 2"));
    }
    let d = space.d();
    let interior = 1..=n_max - 1;
    let lhs =
        (&build_contraction(space) * &build_m_dagger(ladders)?).restrict_input(interior.clone());
    let rhs = &(&FockOperator::identity(d, n_max, SpaceKind::Fock, interior.clone()) * d as f64)
        - &build_cyclic_shift(space).restrict_input(interior);
    Ok(residual(&lhs, &rhs))
}

/// Entrywise distance between the two assemblies of the `|M|²` form.
pub fn verify_abs_m_squared_paths(space: &TruncatedFock, ladders: &LadderSet) -> Result<f64> {
    let a = abs_m_squared(space, ladders)?;
    let b = abs_m_squared_via_gaussians(space, ladders)?;
    Ok((&a.matrix - &b.matrix).amax())
}

/// Entrywise change of the `⟨MΦ, MΨ⟩` form on `F_{N−1}` when `M` is built
/// from the orthonormal basis given by the columns of `basis` instead of
/// the standard one.
pub fn basis_independence_residual(
    space: &TruncatedFock,
    ladders: &LadderSet,
    basis: &DMatrix<f64>,
) -> Result<f64> {
    let d = space.d();
    if basis.shape() != (d, d) {
        return Err(Error::invalid(format!("basis must be {d}x{d}")));
    }
    if (basis.tr_mul(basis) - DMatrix::identity(d, d)).amax() > 1e-12 {
        return Err(Error::invalid("basis columns must be orthonormal"));
    }
    let reference = abs_m_squared(space, ladders)?;
    let top = space.n_max() - 1;
    let rotated = build_gap_operator_in_basis(ladders, basis)?.restrict_input(0..=top);
    let dim = reference.matrix.nrows();
    let offs = &reference.offsets;
    let mut form = DMatrix::zeros(dim, dim);
    for out in 0..=space.n_max() {
        let rows = space.level_dim(SpaceKind::HTensorFock, out);
        let mut images = DMatrix::zeros(rows, dim);
        for n in 0..=top {
            if let Some(b) = rotated.block(out, n) {
                let t = crate::linalg::transport(
                    b,
                    space.factor(SpaceKind::HTensorFock, out),
                    space.factor(SpaceKind::Fock, n),
                );
                images
                    .columns_mut(offs[n], offs[n + 1] - offs[n])
                    .copy_from(&t);
            }
        }
        form += images.tr_mul(&images);
    }
    Ok((form - &reference.matrix).amax())
}
