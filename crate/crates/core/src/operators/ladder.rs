//! Left/right creation and annihilation operators and the q-Gaussians
//! `L_i = l_i + l*_i`, `R_i = r_i + r*_i`, in word coordinates.

use nalgebra::DMatrix;

use super::fock_operator::FockOperator;
use crate::error::{Error, Result};
use crate::fock::word::{rank, unrank};
use crate::fock::{SpaceKind, TruncatedFock};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

fn check_index(i: usize, space: &TruncatedFock) -> Result<usize> {
    if i == 0 || i > space.d() {
        return Err(Error::invalid(format!(
            "basis index {i} outside 1..={}",
            space.d()
        )));
    }
    Ok(i - 1)
}

fn creation(i: usize, space: &TruncatedFock, side: Side) -> Result<FockOperator> {
    let letter = check_index(i, space)?;
    let (d, n_max) = (space.d(), space.n_max());
    let mut op = FockOperator::zero(d, n_max, SpaceKind::Fock, SpaceKind::Fock);
    for n in 0..n_max {
        let cols = space.level_dim(SpaceKind::Fock, n);
        let mut block = DMatrix::zeros(cols * d, cols);
        for w in 0..cols {
            let row = match side {
                Side::Left => letter * cols + w,
                Side::Right => w * d + letter,
            };
            block[(row, w)] = 1.0;
        }
        op.add_block(n + 1, n, block);
    }
    Ok(op)
}

fn annihilation(i: usize, space: &TruncatedFock, side: Side) -> Result<FockOperator> {
    let letter = check_index(i, space)?;
    let (d, n_max, q) = (space.d(), space.n_max(), space.q());
    let mut op = FockOperator::zero(d, n_max, SpaceKind::Fock, SpaceKind::Fock);
    let mut digits = Vec::new();
    let mut rest = Vec::new();
    for n in 1..=n_max {
        let cols = space.level_dim(SpaceKind::Fock, n);
        let mut block = DMatrix::zeros(cols / d, cols);
        digits.resize(n, 0);
        for w in 0..cols {
            unrank(w, d, &mut digits);
            for k in (0..n).filter(|&k| digits[k] == letter) {
                let exponent = match side {
                    Side::Left => k,
                    Side::Right => n - 1 - k,
                };
                rest.clear();
                rest.extend_from_slice(&digits[..k]);
                rest.extend_from_slice(&digits[k + 1..]);
                block[(rank(&rest, d), w)] += q.powi(exponent as i32);
            }
        }
        op.add_block(n - 1, n, block);
    }
    Ok(op)
}

/// `l*_i`: prepends `e_i`; clipped at level `N`.
pub fn creation_left(i: usize, space: &TruncatedFock) -> Result<FockOperator> {
    creation(i, space, Side::Left)
}

/// `r*_i`: appends `e_i`; clipped at level `N`.
pub fn creation_right(i: usize, space: &TruncatedFock) -> Result<FockOperator> {
    creation(i, space, Side::Right)
}

/// `l_i`: removes a letter `i` from slot `k` with weight `q^(k-1)`.
pub fn annihilation_left(i: usize, space: &TruncatedFock) -> Result<FockOperator> {
    annihilation(i, space, Side::Left)
}

/// `r_i`: removes a letter `i` from slot `k` with weight `q^(n-k)`.
pub fn annihilation_right(i: usize, space: &TruncatedFock) -> Result<FockOperator> {
    annihilation(i, space, Side::Right)
}

/// `L_i = l_i + l*_i`.
pub fn gaussian_left(i: usize, space: &TruncatedFock) -> Result<FockOperator> {
    Ok(&annihilation_left(i, space)? + &creation_left(i, space)?)
}

/// `R_i = r_i + r*_i`.
pub fn gaussian_right(i: usize, space: &TruncatedFock) -> Result<FockOperator> {
    Ok(&annihilation_right(i, space)? + &creation_right(i, space)?)
}

/// Every ladder operator for `i = 1..=d`, assembled once.
#[derive(Clone, Debug)]
pub struct LadderSet {
    pub creation_left: Vec<FockOperator>,
    pub creation_right: Vec<FockOperator>,
    pub annihilation_left: Vec<FockOperator>,
    pub annihilation_right: Vec<FockOperator>,
}

impl LadderSet {
    pub fn new(space: &TruncatedFock) -> Result<Self> {
        let all = |f: fn(usize, &TruncatedFock) -> Result<FockOperator>| {
            (1..=space.d())
                .map(|i| f(i, space))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            creation_left: all(creation_left)?,
            creation_right: all(creation_right)?,
            annihilation_left: all(annihilation_left)?,
            annihilation_right: all(annihilation_right)?,
        })
    }

    pub fn d(&self) -> usize {
        self.creation_left.len()
    }

    /// `L_i` (one-based `i`).
    pub fn gaussian_left(&self, i: usize) -> FockOperator {
        &self.annihilation_left[i - 1] + &self.creation_left[i - 1]
    }

    /// `R_i` (one-based `i`).
    pub fn gaussian_right(&self, i: usize) -> FockOperator {
        &self.annihilation_right[i - 1] + &self.creation_right[i - 1]
    }

    /// `Σ_j c_j X_j` over one family of operators, e.g. `&ladders.creation_left`.
    pub fn combine(family: &[FockOperator], coefficients: &[f64]) -> FockOperator {
        let mut acc = &family[0] * coefficients[0];
        for (op, &c) in family.iter().zip(coefficients).skip(1) {
            acc = &acc + &(op * c);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::word::{word_index, Word};
    use crate::operators::FockVector;

    fn basis(space: &TruncatedFock, letters: &[usize]) -> FockVector {
        let w = Word::new(letters.to_vec(), space.d()).unwrap();
        let idx = word_index(&w, space.d()).unwrap();
        FockVector::basis(
            space.d(),
            space.n_max(),
            SpaceKind::Fock,
            letters.len(),
            idx,
        )
    }

    #[test]
    fn creation_examples() {
        let space = TruncatedFock::new(0.3, 2, 3).unwrap();
        let l1 = creation_left(1, &space).unwrap();
        let omega = FockVector::vacuum(2, 3);
        assert_eq!(l1.apply(&omega), basis(&space, &[1]));
        let l2 = creation_left(2, &space).unwrap();
        assert_eq!(l2.apply(&basis(&space, &[1])), basis(&space, &[2, 1]));
        let r1 = creation_right(1, &space).unwrap();
        assert_eq!(r1.apply(&omega), basis(&space, &[1]));
        assert_eq!(r1.apply(&basis(&space, &[2])), basis(&space, &[2, 1]));
        // Each basis word maps to exactly one word one level up.
        for (_, b) in l2.blocks() {
            for c in 0..b.ncols() {
                assert_eq!(b.column(c).sum(), 1.0);
            }
        }
        // Level N is clipped.
        assert!(l1.block(4, 3).is_none());
        assert_eq!(l1.band(), 1);
    }

    #[test]
    fn annihilation_examples() {
        let q = 0.3;
        let space = TruncatedFock::new(q, 2, 3).unwrap();
        let omega = FockVector::vacuum(2, 3);
        let l1 = annihilation_left(1, &space).unwrap();
        assert_eq!(l1.apply(&omega).max_abs(), 0.0);
        let v = l1.apply(&basis(&space, &[1, 1]));
        assert!((v.levels[1][0] - (1.0 + q)).abs() < 1e-15);
        let v = l1.apply(&basis(&space, &[2, 1]));
        assert!((v.levels[1][1] - q).abs() < 1e-15 && v.levels[1][0] == 0.0);

        let r1 = annihilation_right(1, &space).unwrap();
        let v = r1.apply(&basis(&space, &[1, 2]));
        assert!((v.levels[1][1] - q).abs() < 1e-15 && v.levels[1][0] == 0.0);
        let v = r1.apply(&basis(&space, &[1, 1]));
        assert!((v.levels[1][0] - (1.0 + q)).abs() < 1e-15);
    }

    #[test]
    fn free_case_keeps_only_the_end_slot() {
        let space = TruncatedFock::new(0.0, 2, 3).unwrap();
        let l1 = annihilation_left(1, &space).unwrap();
        let r1 = annihilation_right(1, &space).unwrap();
        // e1 ⊗ e2 ⊗ e1: left removes slot 1, right removes slot 3.
        let v = basis(&space, &[1, 2, 1]);
        assert_eq!(l1.apply(&v), basis(&space, &[2, 1]));
        assert_eq!(r1.apply(&v), basis(&space, &[1, 2]));
        for op in [&l1, &r1] {
            for (_, b) in op.blocks() {
                assert!(b.iter().all(|&x| x == 0.0 || x == 1.0));
            }
        }
    }

    #[test]
    fn gaussian_vacuum_moments() {
        let space = TruncatedFock::new(-0.4, 3, 3).unwrap();
        let l1 = gaussian_left(1, &space).unwrap();
        let omega = FockVector::vacuum(3, 3);
        assert_eq!(l1.apply(&omega), basis(&space, &[1]));
        let second = l1.apply(&l1.apply(&omega));
        assert!((omega.q_inner(&second, &space) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn index_range_checked() {
        let space = TruncatedFock::new(0.0, 2, 2).unwrap();
        assert!(matches!(
            creation_left(0, &space),
            Err(Error::InvalidInput(_))
        ));
        assert!(annihilation_right(3, &space).is_err());
    }
}
