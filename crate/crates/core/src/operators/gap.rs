//! The maps `m`, `m†`, `M = m + m†` into `H ⊗ F`, the compression of
//! `|M|² = Σ_i (L_i − R_i)²`, the cyclic shift `S` and the contraction `f`.

use nalgebra::{DMatrix, DVector};

use super::fock_operator::FockOperator;
use super::ladder::LadderSet;
use crate::error::{Error, Result};
use crate::fock::word::{rank, unrank};
use crate::fock::{SpaceKind, TruncatedFock};
use crate::linalg::transport;

fn standard_basis(d: usize) -> DMatrix<f64> {
    DMatrix::identity(d, d)
}

fn columns(basis: &DMatrix<f64>) -> Vec<DVector<f64>> {
    basis.column_iter().map(|c| c.into_owned()).collect()
}

/// `m = Σ_i e_i ⊗ (l_i − r_i)`.
pub fn build_m(ladders: &LadderSet) -> Result<FockOperator> {
    build_m_in_basis(ladders, &standard_basis(ladders.d()))
}

/// `m† = Σ_i e_i ⊗ (l*_i − r*_i)`.
pub fn build_m_dagger(ladders: &LadderSet) -> Result<FockOperator> {
    build_m_dagger_in_basis(ladders, &standard_basis(ladders.d()))
}

/// `M = m + m† = Σ_i e_i ⊗ (L_i − R_i)`.
pub fn build_gap_operator(ladders: &LadderSet) -> Result<FockOperator> {
    build_gap_operator_in_basis(ladders, &standard_basis(ladders.d()))
}

/// `m` written in the orthonormal basis given by the columns of `basis`.
pub fn build_m_in_basis(ladders: &LadderSet, basis: &DMatrix<f64>) -> Result<FockOperator> {
    let ops: Vec<FockOperator> = basis
        .column_iter()
        .map(|c| {
            let c = c.as_slice();
            &LadderSet::combine(&ladders.annihilation_left, c)
                - &LadderSet::combine(&ladders.annihilation_right, c)
        })
        .collect();
    FockOperator::tensor_sum(&columns(basis), &ops)
}

pub fn build_m_dagger_in_basis(ladders: &LadderSet, basis: &DMatrix<f64>) -> Result<FockOperator> {
    let ops: Vec<FockOperator> = basis
        .column_iter()
        .map(|c| {
            let c = c.as_slice();
            &LadderSet::combine(&ladders.creation_left, c)
                - &LadderSet::combine(&ladders.creation_right, c)
        })
        .collect();
    FockOperator::tensor_sum(&columns(basis), &ops)
}

pub fn build_gap_operator_in_basis(
    ladders: &LadderSet,
    basis: &DMatrix<f64>,
) -> Result<FockOperator> {
    Ok(&build_m_in_basis(ladders, basis)? + &build_m_dagger_in_basis(ladders, basis)?)
}

/// A symmetric matrix on `F_K = ⊕_{n≤K}` in q-orthonormal coordinates.
#[derive(Clone, Debug)]
pub struct CompressedForm {
    pub matrix: DMatrix<f64>,
    /// Start index of each level; level `n` occupies `offsets[n]..offsets[n+1]`.
    pub offsets: Vec<usize>,
}

impl CompressedForm {
    /// Largest of `|Q_ΩΩ|` and the norm of the vacuum row.
    pub fn vacuum_residual(&self) -> f64 {
        let row = self.matrix.row(0).norm();
        let col = self.matrix.column(0).norm();
        self.matrix[(0, 0)].abs().max(row).max(col)
    }

    /// The compression onto `F⁺_K` (vacuum row and column removed).
    pub fn positive_part(&self) -> DMatrix<f64> {
        let n = self.matrix.nrows();
        self.matrix.view((1, 1), (n - 1, n - 1)).into_owned()
    }
}

fn offsets(space: &TruncatedFock, top: usize) -> Vec<usize> {
    let mut out = vec![0];
    for n in 0..=top {
        out.push(out[n] + space.level_dim(SpaceKind::Fock, n));
    }
    out
}

fn require_two_levels(space: &TruncatedFock) -> Result<()> {
    if space.n_max() < 2 {
        return Err(Error::invalid(format!(
            "|M|² analysis needs N >= 2, got N = {}",
            space.n_max()
        )));
    }
    Ok(())
}

/// The quadratic form `Φ, Ψ ↦ ⟨MΦ, MΨ⟩` on `F_{N−1}`, in q-orthonormal
/// coordinates, assembled as the Gram matrix of the images of `M`.
///
/// `M` moves degree by one, so images of `F_{N−1}` lie in `H ⊗ F_N` and
/// the form is exact.
pub fn abs_m_squared(space: &TruncatedFock, ladders: &LadderSet) -> Result<CompressedForm> {
    require_two_levels(space)?;
    let top = space.n_max() - 1;
    let offs = offsets(space, top);
    let gap_op = build_gap_operator(ladders)?.restrict_input(0..=top);
    let dim = offs[top + 1];
    let mut q_form = DMatrix::zeros(dim, dim);
    for out in 0..=space.n_max() {
        let rows = space.level_dim(SpaceKind::HTensorFock, out);
        let mut images = DMatrix::zeros(rows, dim);
        let mut any = false;
        for n in 0..=top {
            if let Some(block) = gap_op.block(out, n) {
                let t = transport(
                    block,
                    space.factor(SpaceKind::HTensorFock, out),
                    space.factor(SpaceKind::Fock, n),
                );
                images
                    .columns_mut(offs[n], offs[n + 1] - offs[n])
                    .copy_from(&t);
                any = true;
            }
        }
        if any {
            q_form += images.tr_mul(&images);
        }
    }
    Ok(CompressedForm {
        matrix: q_form,
        offsets: offs,
    })
}

/// The same form via `Σ_i (L_i − R_i)²` compressed to `F_{N−1}`.
pub fn abs_m_squared_via_gaussians(
    space: &TruncatedFock,
    ladders: &LadderSet,
) -> Result<CompressedForm> {
    require_two_levels(space)?;
    let top = space.n_max() - 1;
    let offs = offsets(space, top);
    let mut sum: Option<FockOperator> = None;
    for i in 1..=space.d() {
        let diff = &ladders.gaussian_left(i) - &ladders.gaussian_right(i);
        let sq = &diff * &diff;
        sum = Some(match sum {
            Some(acc) => &acc + &sq,
            None => sq,
        });
    }
    let compressed = sum
        .expect("d >= 1")
        .restrict_input(0..=top)
        .restrict_output(0..=top)
        .transported(space);
    let dim = offs[top + 1];
    let mut matrix = DMatrix::zeros(dim, dim);
    for ((o, i), b) in compressed.blocks() {
        matrix.view_mut((offs[o], offs[i]), b.shape()).copy_from(b);
    }
    Ok(CompressedForm {
        matrix,
        offsets: offs,
    })
}

/// `S(e_{w1} ⊗ e_{w2} ⊗ … ⊗ e_{wn}) = e_{w2} ⊗ … ⊗ e_{wn} ⊗ e_{w1}` on
/// levels `1..=N`.
pub fn build_cyclic_shift(space: &TruncatedFock) -> FockOperator {
    let (d, n_max) = (space.d(), space.n_max());
    let mut op = FockOperator::zero(d, n_max, SpaceKind::Fock, SpaceKind::Fock);
    for n in 1..=n_max {
        let dim = space.level_dim(SpaceKind::Fock, n);
        let mut digits = vec![0; n];
        let mut block = DMatrix::zeros(dim, dim);
        for w in 0..dim {
            unrank(w, d, &mut digits);
            digits.rotate_left(1);
            block[(rank(&digits, d), w)] = 1.0;
        }
        op.add_block(n, n, block);
    }
    op
}

/// `f(φ ⊗ ψ₁ ⊗ … ⊗ ψₙ) = (φ, ψ₁) ψ₂ ⊗ … ⊗ ψₙ` from `H ⊗ F⁺` (levels
/// `1..=N`) to `F`.
pub fn build_contraction(space: &TruncatedFock) -> FockOperator {
    let (d, n_max) = (space.d(), space.n_max());
    let mut op = FockOperator::zero(d, n_max, SpaceKind::HTensorFock, SpaceKind::Fock);
    for n in 1..=n_max {
        let cols = space.level_dim(SpaceKind::HTensorFock, n);
        let rows = space.level_dim(SpaceKind::Fock, n - 1);
        let mut digits = vec![0; n + 1];
        let mut block = DMatrix::zeros(rows, cols);
        for col in 0..cols {
            unrank(col, d, &mut digits);
            if digits[0] == digits[1] {
                block[(rank(&digits[2..], d), col)] = 1.0;
            }
        }
        op.add_block(n - 1, n, block);
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::word::{word_index, Word};
    use crate::operators::FockVector;

    fn idx(letters: &[usize], d: usize) -> usize {
        word_index(&Word::new(letters.to_vec(), d).unwrap(), d).unwrap()
    }

    #[test]
    fn vacuum_is_killed() {
        let space = TruncatedFock::new(0.4, 2, 3).unwrap();
        let ladders = LadderSet::new(&space).unwrap();
        let omega = FockVector::vacuum(2, 3);
        assert_eq!(build_m(&ladders).unwrap().apply(&omega).max_abs(), 0.0);
        assert_eq!(
            build_m_dagger(&ladders).unwrap().apply(&omega).max_abs(),
            0.0
        );
        assert_eq!(
            build_gap_operator(&ladders)
                .unwrap()
                .apply(&omega)
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn m_dagger_on_e1_expansion() {
        let space = TruncatedFock::new(0.0, 2, 3).unwrap();
        let ladders = LadderSet::new(&space).unwrap();
        let e1 = FockVector::basis(2, 3, SpaceKind::Fock, 1, 0);
        let image = build_m_dagger(&ladders).unwrap().apply(&e1);
        // Σ_i e_i ⊗ (e_i⊗e_1 − e_1⊗e_i): the i = 1 term cancels, leaving
        // e_2⊗e_2⊗e_1 − e_2⊗e_1⊗e_2.
        let lvl = &image.levels[2];
        let mut expected = DVector::zeros(8);
        expected[idx(&[2, 2, 1], 2)] = 1.0;
        expected[idx(&[2, 1, 2], 2)] = -1.0;
        assert_eq!(lvl, &expected);
        assert_eq!(
            image.levels[0].amax() + image.levels[1].amax() + image.levels[3].amax(),
            0.0
        );
    }

    #[test]
    fn shift_and_contraction_examples() {
        let space = TruncatedFock::new(0.5, 2, 3).unwrap();
        let s = build_cyclic_shift(&space);
        let v = FockVector::basis(2, 3, SpaceKind::Fock, 2, idx(&[1, 2], 2));
        assert_eq!(
            s.apply(&v),
            FockVector::basis(2, 3, SpaceKind::Fock, 2, idx(&[2, 1], 2))
        );
        let f = build_contraction(&space);
        // e_1 ⊗ e_1 (H ⊗ level 1) contracts to Ω.
        let x = FockVector::basis(2, 3, SpaceKind::HTensorFock, 1, idx(&[1, 1], 2));
        assert_eq!(f.apply(&x), FockVector::vacuum(2, 3));
        let y = FockVector::basis(2, 3, SpaceKind::HTensorFock, 1, idx(&[1, 2], 2));
        assert_eq!(f.apply(&y).max_abs(), 0.0);
    }

    #[test]
    fn abs_m_squared_requires_two_levels() {
        let space = TruncatedFock::new(0.0, 2, 1).unwrap();
        let ladders = LadderSet::new(&space).unwrap();
        assert!(matches!(
            abs_m_squared(&space, &ladders),
            Err(Error::InvalidInput(_))
        ));
    }
}
