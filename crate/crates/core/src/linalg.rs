//! Dense linear algebra: Cholesky with positivity reporting, transport
//! through block-diagonal `I ⊗ L` factors, and the extremal symmetric
//! eigensolver contract shared by every norm and gap computation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot threshold used by [`cholesky`].
pub const CHOLESKY_RELATIVE_PIVOT: f64 = 1e-12;

/// Lower-triangular `L` with `L Lᵀ = a`.
///
/// Fails with [`Error::NotPositiveDefinite`] as soon as a pivot drops to
/// `1e-12 * max_i a_ii` or below; no regularization is attempted.
pub fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid(format!(
            "cholesky needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0f64, f64::max);
    let threshold = CHOLESKY_RELATIVE_PIVOT * max_diag;

    // Row-major scratch so the inner products run over contiguous slices.
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let (row_i, row_j) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            let dot: f64 = row_i.iter().zip(row_j).map(|(x, y)| x * y).sum();
            let value = a[(i, j)] - dot;
            if i == j {
                if value.is_nan() || value <= threshold {
                    return Err(Error::NotPositiveDefinite {
                        pivot: i,
                        value,
                        threshold,
                    });
                }
                l[i * n + i] = value.sqrt();
            } else {
                l[i * n + j] = value / l[j * n + j];
            }
        }
    }
    Ok(DMatrix::from_row_slice(n, n, &l))
}

/// The block-diagonal factor `I_reps ⊗ L`, never formed densely.
///
/// Row chunk `c` of a vector indexed by `c * dim(L) + w` is acted on by `L`.
#[derive(Clone, Copy, Debug)]
pub struct KronFactor<'a> {
    pub factor: &'a DMatrix<f64>,
    pub reps: usize,
}

impl<'a> KronFactor<'a> {
    pub fn new(factor: &'a DMatrix<f64>, reps: usize) -> Self {
        Self { factor, reps }
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows() * self.reps
    }

    fn map_chunks(
        &self,
        x: &DMatrix<f64>,
        f: impl Fn(nalgebra::DMatrixView<'_, f64>) -> DMatrix<f64>,
    ) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.dim(), "row count does not match factor");
        let block = self.factor.nrows();
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for c in 0..self.reps {
            let chunk = f(x.rows(c * block, block));
            out.rows_mut(c * block, block).copy_from(&chunk);
        }
        out
    }

    /// `(I ⊗ L) x`
    pub fn l_mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.map_chunks(x, |chunk| self.factor * chunk)
    }

    /// `(I ⊗ L)ᵀ x`
    pub fn lt_mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.map_chunks(x, |chunk| self.factor.tr_mul(&chunk))
    }

    /// `(I ⊗ L)⁻¹ x`
    pub fn l_solve(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.map_chunks(x, |chunk| {
            self.factor
                .solve_lower_triangular(&chunk)
                .expect("Cholesky factor has a positive diagonal")
        })
    }

    /// `(I ⊗ L)⁻ᵀ x`
    pub fn lt_solve(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.map_chunks(x, |chunk| {
            self.factor
                .tr_solve_lower_triangular(&chunk)
                .expect("Cholesky factor has a positive diagonal")
        })
    }

    /// Gram-matrix product `(I ⊗ L Lᵀ) x`.
    pub fn gram_mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.l_mul(&self.lt_mul(x))
    }
}

/// Expresses `a: (in-space) -> (out-space)` in orthonormal coordinates:
/// `L_outᵀ · a · L_in⁻ᵀ`.
pub fn transport(a: &DMatrix<f64>, out: KronFactor<'_>, input: KronFactor<'_>) -> DMatrix<f64> {
    let right = input.l_solve(&a.transpose()).transpose();
    out.lt_mul(&right)
}

/// Adjoint of `a` with respect to the Gram geometries `G_in`, `G_out`:
/// `G_in⁻¹ aᵀ G_out`.
pub fn weighted_adjoint(
    a: &DMatrix<f64>,
    out: KronFactor<'_>,
    input: KronFactor<'_>,
) -> DMatrix<f64> {
    let at_gout = out.gram_mul(a).transpose();
    input.lt_solve(&input.l_solve(&at_gout))
}

/// Which backend produced an eigen result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenBackend {
    Dense,
    Lanczos,
}

/// Extremal eigenpairs of a symmetric matrix with their residuals
/// `‖Av − λv‖` for unit `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigExtremes {
    pub min: f64,
    pub max: f64,
    pub min_residual: f64,
    pub max_residual: f64,
    pub backend: EigenBackend,
}

/// Settings for [`EigenSolver::extremes`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenSolver {
    /// Matrices of this dimension or larger go to the Lanczos backend.
    pub dense_cutoff: usize,
    /// Krylov dimension budget for the Lanczos backend.
    pub max_iterations: usize,
    /// Accepted residual relative to the spectral radius.
    pub residual_tol: f64,
}

impl Default for EigenSolver {
    fn default() -> Self {
        Self {
            dense_cutoff: 3000,
            max_iterations: 600,
            residual_tol: 1e-8,
        }
    }
}

/// Asymmetry tolerated before a matrix is rejected, relative to its largest entry.
const SYMMETRY_TOL: f64 = 1e-10;

impl EigenSolver {
    /// Smallest and largest eigenvalue of a symmetric matrix.
    ///
    /// The input is symmetrized first; asymmetry above `1e-10` (relative to
    /// the largest entry) is rejected as invalid input.
    pub fn extremes(&self, a: &DMatrix<f64>) -> Result<EigExtremes> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::invalid("eigensolver needs a square matrix"));
        }
        if n == 0 {
            return Err(Error::invalid("eigensolver needs a non-empty matrix"));
        }
        let scale = a.amax().max(1.0);
        let asymmetry = (a - a.transpose()).amax();
        if asymmetry > SYMMETRY_TOL * scale {
            return Err(Error::invalid(format!(
                "matrix is not symmetric (max |A - Aᵀ| = {asymmetry:e})"
            )));
        }
        let sym = (a + a.transpose()) * 0.5;
        if n >= self.dense_cutoff {
            self.lanczos(n, |v| &sym * v)
        } else {
            self.dense(sym)
        }
    }

    fn accept(&self, result: EigExtremes, iterations: usize) -> Result<EigExtremes> {
        let radius = result.min.abs().max(result.max.abs());
        let required = self.residual_tol * radius.max(f64::MIN_POSITIVE);
        let worst = result.min_residual.max(result.max_residual);
        if worst <= required || worst == 0.0 {
            Ok(result)
        } else {
            Err(Error::NoConvergence {
                iterations,
                residual: worst,
                required,
            })
        }
    }

    fn dense(&self, sym: DMatrix<f64>) -> Result<EigExtremes> {
        let eig = SymmetricEigen::new(sym.clone());
        let (imin, imax) = extremal_indices(eig.eigenvalues.as_slice());
        let residual = |i: usize| {
            let v = eig.eigenvectors.column(i);
            (&sym * v - v * eig.eigenvalues[i]).norm() / v.norm()
        };
        let result = EigExtremes {
            min: eig.eigenvalues[imin],
            max: eig.eigenvalues[imax],
            min_residual: residual(imin),
            max_residual: residual(imax),
            backend: EigenBackend::Dense,
        };
        self.accept(result, 1)
    }

    /// Lanczos with full reorthogonalization, for an operator given by its
    /// matrix-vector product.
    pub fn lanczos(
        &self,
        n: usize,
        matvec: impl Fn(&DVector<f64>) -> DVector<f64>,
    ) -> Result<EigExtremes> {
        let budget = self.max_iterations.min(n).max(1);
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(budget);
        let mut images: Vec<DVector<f64>> = Vec::with_capacity(budget);
        let mut alpha: Vec<f64> = Vec::with_capacity(budget);
        let mut beta: Vec<f64> = Vec::with_capacity(budget);
        let mut seed = 0usize;

        let mut v = start_vector(n, seed);
        let mut best = f64::INFINITY;
        let mut best_result: Option<EigExtremes> = None;

        while basis.len() < budget {
            let w0 = matvec(&v);
            let a = v.dot(&w0);
            let mut w = &w0 - &v * a;
            if let Some(prev) = basis.last() {
                w -= prev * *beta.last().unwrap_or(&0.0);
            }
            basis.push(v.clone());
            images.push(w0);
            alpha.push(a);
            // Two passes of Gram-Schmidt against the whole basis.
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dot(&w);
                    w -= q * c;
                }
            }
            let b = w.norm();
            let m = basis.len();
            let check = m == budget || m.is_multiple_of(10) || b <= 1e-12 * a.abs().max(1.0);
            if check {
                let result = ritz_extremes(&basis, &images, &alpha, &beta);
                let worst = result.min_residual.max(result.max_residual);
                if worst < best {
                    best = worst;
                    best_result = Some(result.clone());
                }
                if let Ok(accepted) = self.accept(result, m) {
                    return Ok(EigExtremes {
                        backend: EigenBackend::Lanczos,
                        ..accepted
                    });
                }
            }
            if m == budget {
                break;
            }
            if b <= 1e-12 * a.abs().max(1.0) {
                // Invariant subspace: restart orthogonally with a decoupled block.
                seed += 1;
                let mut fresh = start_vector(n, seed);
                for _ in 0..2 {
                    for q in &basis {
                        let c = q.dot(&fresh);
                        fresh -= q * c;
                    }
                }
                let norm = fresh.norm();
                if norm < 1e-12 {
                    break;
                }
                beta.push(0.0);
                v = fresh / norm;
            } else {
                beta.push(b);
                v = w / b;
            }
        }
        let iterations = basis.len();
        match best_result {
            Some(result) => self.accept(result, iterations).map(|r| EigExtremes {
                backend: EigenBackend::Lanczos,
                ..r
            }),
            None => Err(Error::NoConvergence {
                iterations,
                residual: best,
                required: self.residual_tol,
            }),
        }
    }

    /// Largest singular value of `a` (via the smaller of the two Gram matrices).
    pub fn max_singular_value(&self, a: &DMatrix<f64>) -> Result<f64> {
        if a.is_empty() {
            return Ok(0.0);
        }
        let gram = if a.nrows() < a.ncols() {
            a * a.transpose()
        } else {
            a.tr_mul(a)
        };
        Ok(self.extremes(&gram)?.max.max(0.0).sqrt())
    }

    /// Smallest singular value of `a` as a map on its domain (columns).
    pub fn min_singular_value(&self, a: &DMatrix<f64>) -> Result<f64> {
        if a.ncols() == 0 {
            return Ok(f64::INFINITY);
        }
        Ok(self.extremes(&a.tr_mul(a))?.min.max(0.0).sqrt())
    }
}

fn extremal_indices(values: &[f64]) -> (usize, usize) {
    let mut imin = 0;
    let mut imax = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[imin] {
            imin = i;
        }
        if v > values[imax] {
            imax = i;
        }
    }
    (imin, imax)
}

/// Deterministic, non-degenerate start vector.
fn start_vector(n: usize, seed: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |i, _| {
        let h = (i.wrapping_mul(2654435761) ^ seed.wrapping_mul(40503)) % 1009;
        1.0 + h as f64 / 1009.0
    });
    let norm = v.norm();
    v / norm
}

fn ritz_extremes(
    basis: &[DVector<f64>],
    images: &[DVector<f64>],
    alpha: &[f64],
    beta: &[f64],
) -> EigExtremes {
    let m = basis.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (imin, imax) = extremal_indices(eig.eigenvalues.as_slice());
    // Residuals are recomputed from stored images, not from the recurrence.
    let residual = |k: usize| {
        let theta = eig.eigenvalues[k];
        let coeffs = eig.eigenvectors.column(k);
        let mut y = DVector::zeros(basis[0].len());
        let mut ay = DVector::zeros(basis[0].len());
        for j in 0..m {
            y += &basis[j] * coeffs[j];
            ay += &images[j] * coeffs[j];
        }
        (ay - &y * theta).norm() / y.norm()
    };
    EigExtremes {
        min: eig.eigenvalues[imin],
        max: eig.eigenvalues[imax],
        min_residual: residual(imin),
        max_residual: residual(imax),
        backend: EigenBackend::Lanczos,
    }
}
