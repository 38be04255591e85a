use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, EigenSolver, KronFactor};

/// One level `H^{⊗n}_q`: the Gram matrix `P⁽ⁿ⁾` in word coordinates and
/// its Cholesky factor.
#[derive(Clone, Debug)]
pub struct LevelSpace {
    level: usize,
    d: usize,
    gram: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl LevelSpace {
    /// Factors `gram`; fails if it is not numerically positive definite.
    pub fn new(level: usize, d: usize, gram: DMatrix<f64>) -> Result<Self> {
        let chol = cholesky(&gram)?;
        Ok(Self {
            level,
            d,
            gram,
            chol,
        })
    }

    /// Reassembles a level from stored parts (used by the cache).
    pub(crate) fn from_parts(
        level: usize,
        d: usize,
        gram: DMatrix<f64>,
        chol: DMatrix<f64>,
    ) -> Result<Self> {
        if gram.shape() != chol.shape() || !gram.is_square() {
            return Err(Error::invalid("gram and factor shapes disagree"));
        }
        Ok(Self {
            level,
            d,
            gram,
            chol,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// `I_reps ⊗ chol`.
    pub fn factor(&self, reps: usize) -> KronFactor<'_> {
        KronFactor::new(&self.chol, reps)
    }

    pub fn gram_min_eigenvalue(&self, solver: &EigenSolver) -> Result<f64> {
        gram_min_eigenvalue(self, solver)
    }
}

/// Smallest eigenvalue of `P⁽ⁿ⁾`.
pub fn gram_min_eigenvalue(level: &LevelSpace, solver: &EigenSolver) -> Result<f64> {
    Ok(solver.extremes(level.gram())?.min)
}

/// Lower-triangular `F` with `F Fᵀ = gram`; `y = Fᵀ x` turns `⟨·,·⟩_q`
/// into the dot product.
pub fn orthonormalize(level: &LevelSpace) -> Result<DMatrix<f64>> {
    cholesky(level.gram())
}
