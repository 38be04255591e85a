//! The symmetrizer `P⁽ⁿ⁾ = Σ_σ q^inv(σ) · (slot permutation σ)` in word
//! coordinates.
//!
//! Two independent constructions are provided. The default one climbs the
//! levels with `P⁽ⁿ⁺¹⁾ = (1 ⊗ P⁽ⁿ⁾)(1 + qT₁ + q²T₁T₂ + … + qⁿT₁⋯Tₙ)`, where
//! `T₁⋯T_k` moves the letter in slot `k+1` to the front across `k` others.
//! The brute-force sum over `S_n` is kept as an oracle.

use nalgebra::DMatrix;

use super::word::{level_dim, rank, unrank};
use crate::combinatorics::{enumerate_permutations, inversions};
use crate::error::{validate_q, Error, Result};

/// Default cap on the dimension `d^n` of a single level.
pub const DEFAULT_MAX_LEVEL_DIM: usize = 4096;

pub(crate) fn checked_level_dim(d: usize, n: usize, max_dim: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::invalid("dimension d must be at least 1"));
    }
    match level_dim(d, n) {
        Some(dim) if dim <= max_dim => Ok(dim),
        other => Err(Error::ResourceLimit {
            what: "level dimension d^n",
            requested: other.unwrap_or(usize::MAX),
            limit: max_dim,
        }),
    }
}

/// `P⁽ⁿ⁾` on `(R^d)^{⊗n}` via the level recursion.
pub fn build_symmetrizer(n: usize, d: usize, q: f64) -> Result<DMatrix<f64>> {
    validate_q(q)?;
    checked_level_dim(d, n, DEFAULT_MAX_LEVEL_DIM)?;
    let mut p = DMatrix::identity(1, 1);
    for level in 0..n {
        p = symmetrizer_next(&p, level, d, q);
    }
    Ok(p)
}

/// One recursion step: `P⁽ⁿ⁺¹⁾` from `P⁽ⁿ⁾` (with `prev` of size `d^n`).
pub fn symmetrizer_next(prev: &DMatrix<f64>, n: usize, d: usize, q: f64) -> DMatrix<f64> {
    let tail_dim = prev.nrows();
    let m = n + 1;
    let dim = tail_dim * d;
    let mut p = DMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; m];
    let mut moved = vec![0usize; m];
    let powers: Vec<f64> = (0..m).map(|k| q.powi(k as i32)).collect();

    for col in 0..dim {
        unrank(col, d, &mut digits);
        for (k, &weight) in powers.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            // T₁⋯T_k e_w: slot k (zero-based) jumps to the front.
            moved[0] = digits[k];
            moved[1..=k].copy_from_slice(&digits[..k]);
            moved[k + 1..].copy_from_slice(&digits[k + 1..]);
            let head = moved[0];
            let tail = rank(&moved[1..], d);
            // (1 ⊗ P⁽ⁿ⁾) e_head ⊗ e_tail: column `tail` of P⁽ⁿ⁾ in chunk `head`.
            let source = prev.column(tail);
            p.column_mut(col)
                .rows_mut(head * tail_dim, tail_dim)
                .axpy(weight, &source, 1.0);
        }
    }
    symmetrize(&mut p);
    p
}

/// `P⁽ⁿ⁾` as the literal sum over `S_n`.
pub fn symmetrizer_brute_force(n: usize, d: usize, q: f64) -> Result<DMatrix<f64>> {
    validate_q(q)?;
    let dim = checked_level_dim(d, n, DEFAULT_MAX_LEVEL_DIM)?;
    let mut p = DMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; n];
    let mut permuted = vec![0usize; n];
    for sigma in enumerate_permutations(n)? {
        let weight = q.powi(inversions(&sigma) as i32);
        for col in 0..dim {
            unrank(col, d, &mut digits);
            for (slot, &source) in sigma.images().iter().enumerate() {
                permuted[slot] = digits[source];
            }
            p[(rank(&permuted, d), col)] += weight;
        }
    }
    symmetrize(&mut p);
    Ok(p)
}

fn symmetrize(p: &mut DMatrix<f64>) {
    let n = p.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (p[(i, j)] + p[(j, i)]);
            p[(i, j)] = avg;
            p[(j, i)] = avg;
        }
    }
}
