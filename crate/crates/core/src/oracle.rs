//! Vacuum moments of the q-Gaussians two ways: from the assembled matrices
//! and from the pair-partition formula `Σ_π q^{cr(π)}`. The formula is used
//! only here, as an independent check on the operators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{crossings, pair_partitions, PairPartition};
use crate::error::{Error, Result};
use crate::fock::TruncatedFock;
use crate::operators::{FockOperator, FockVector, LadderSet};

/// Largest moment order the pair-partition formula will enumerate.
pub const MAX_WICK_ORDER: usize = 12;

/// The indices `(i₁, …, i_k)` of the moment `⟨Ω, L_{i₁} ⋯ L_{i_k} Ω⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MomentQuery {
    pub indices: Vec<usize>,
}

impl MomentQuery {
    /// Indices are one-based and must lie in `1..=d`.
    pub fn new(indices: Vec<usize>, d: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > d) {
            return Err(Error::invalid(format!("index {bad} outside 1..={d}")));
        }
        Ok(Self { indices })
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    /// The query with its indices rotated left by `k`.
    pub fn rotated(&self, k: usize) -> Self {
        let mut indices = self.indices.clone();
        if !indices.is_empty() {
            let k = k % indices.len();
            indices.rotate_left(k);
        }
        Self { indices }
    }
}

/// Pair partitions whose blocks join equal indices, with their crossing numbers.
pub fn contributing_partitions(query: &MomentQuery) -> Result<Vec<(PairPartition, usize)>> {
    let k = query.order();
    if k % 2 == 1 {
        return Ok(Vec::new());
    }
    if k > MAX_WICK_ORDER {
        return Err(Error::ResourceLimit {
            what: "moment order",
            requested: k,
            limit: MAX_WICK_ORDER,
        });
    }
    let idx = &query.indices;
    Ok(pair_partitions(k)?
        .filter(|p| p.pairs().iter().all(|&(a, b)| idx[a - 1] == idx[b - 1]))
        .map(|p| {
            let c = crossings(&p);
            (p, c)
        })
        .collect())
}

/// `Σ_π q^{cr(π)}` over index-respecting pair partitions; zero for odd order.
pub fn wick_moment(query: &MomentQuery, q: f64) -> Result<f64> {
    Ok(contributing_partitions(query)?
        .iter()
        .map(|&(_, c)| q.powi(c as i32))
        .sum())
}

/// Evaluates vacuum moments from assembled `L_i` matrices.
#[derive(Clone, Debug)]
pub struct MatrixMoments<'a> {
    space: &'a TruncatedFock,
    gaussians: Vec<FockOperator>,
}

impl<'a> MatrixMoments<'a> {
    pub fn new(space: &'a TruncatedFock) -> Result<Self> {
        let ladders = LadderSet::new(space)?;
        let gaussians = (1..=space.d()).map(|i| ladders.gaussian_left(i)).collect();
        Ok(Self { space, gaussians })
    }

    /// `⟨Ω, L_{i₁} ⋯ L_{i_k} Ω⟩_q`, applying `L_{i_k}` first.
    ///
    /// Each factor moves one level, so a walk that returns to the vacuum
    /// never rises above `k/2`; order `k` therefore needs `N ≥ ⌈k/2⌉`,
    /// and order `k > 2N` is refused outright.
    pub fn moment(&self, query: &MomentQuery) -> Result<f64> {
        let (d, n_max) = (self.space.d(), self.space.n_max());
        let k = query.order();
        if k > 2 * n_max {
            return Err(Error::TruncationInsufficient {
                order: k,
                required: k.div_ceil(2),
                have: n_max,
            });
        }
        if let Some(&bad) = query.indices.iter().find(|&&i| i == 0 || i > d) {
            return Err(Error::invalid(format!("index {bad} outside 1..={d}")));
        }
        let omega = FockVector::vacuum(d, n_max);
        let mut v = omega.clone();
        for &i in query.indices.iter().rev() {
            v = self.gaussians[i - 1].apply(&v);
        }
        Ok(omega.q_inner(&v, self.space))
    }
}

/// Convenience wrapper around [`MatrixMoments`] for a single query.
pub fn matrix_moment(query: &MomentQuery, space: &TruncatedFock) -> Result<f64> {
    MatrixMoments::new(space)?.moment(query)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContributingPartition {
    pub pairs: Vec<(usize, usize)>,
    pub crossings: usize,
}

/// A tuple on which the two moment computations disagree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentMismatch {
    pub indices: Vec<usize>,
    pub wick: f64,
    pub matrix: f64,
    pub partitions: Vec<ContributingPartition>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentComparison {
    pub q: f64,
    pub d: usize,
    pub max_order: usize,
    pub tuples_checked: usize,
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub mismatches: Vec<MomentMismatch>,
}

impl MomentComparison {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Every index tuple over `1..=d` of length `0..=max_order`.
pub fn all_tuples(d: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_order {
        frontier = frontier
            .iter()
            .flat_map(|t: &Vec<usize>| {
                (1..=d).map(move |i| {
                    let mut next = t.clone();
                    next.push(i);
                    next
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Compares the two computations on every tuple up to `max_order`.
pub fn compare_moments(
    space: &TruncatedFock,
    max_order: usize,
    tolerance: f64,
) -> Result<MomentComparison> {
    let evaluator = MatrixMoments::new(space)?;
    let tuples = all_tuples(space.d(), max_order);
    let rows = tuples
        .into_par_iter()
        .map(|indices| {
            let query = MomentQuery { indices };
            let wick = wick_moment(&query, space.q())?;
            let matrix = evaluator.moment(&query)?;
            Ok((query, wick, matrix))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut max_abs_diff = 0.0_f64;
    let mut mismatches = Vec::new();
    for (query, wick, matrix) in &rows {
        let diff = (wick - matrix).abs();
        max_abs_diff = max_abs_diff.max(diff);
        if diff.is_nan() || diff > tolerance {
            let partitions = contributing_partitions(query)?
                .into_iter()
                .map(|(p, crossings)| ContributingPartition {
                    pairs: p.pairs().to_vec(),
                    crossings,
                })
                .collect();
            mismatches.push(MomentMismatch {
                indices: query.indices.clone(),
                wick: *wick,
                matrix: *matrix,
                partitions,
            });
        }
    }
    Ok(MomentComparison {
        q: space.q(),
        d: space.d(),
        max_order,
        tuples_checked: rows.len(),
        max_abs_diff,
        tolerance,
        mismatches,
    })
}
