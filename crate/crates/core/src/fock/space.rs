use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::{CacheStats, GramCache};
use super::level::LevelSpace;
use super::symmetrizer::{checked_level_dim, symmetrizer_next, DEFAULT_MAX_LEVEL_DIM};
use super::word::{rank, unrank};
use crate::error::{validate_q, Error, Result};
use crate::linalg::{EigenSolver, KronFactor};

/// Which Hilbert space an operator block lives on.
///
/// `Fock` level `n` has dimension `d^n` and Gram `P⁽ⁿ⁾`. `HTensorFock`
/// level `n` is `H ⊗ H^{⊗n}_q`: dimension `d^{n+1}`, Gram `I_d ⊗ P⁽ⁿ⁾`,
/// and the basis vector `e_i ⊗ e_w` sits at the index of the word `(i, w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Fock,
    HTensorFock,
}

/// The truncation `F_N = ⊕_{n=0}^{N} H^{⊗n}_q` over `H = R^d`.
#[derive(Clone, Debug)]
pub struct TruncatedFock {
    q: f64,
    d: usize,
    n_max: usize,
    levels: Vec<LevelSpace>,
}

impl TruncatedFock {
    pub fn new(q: f64, d: usize, n_max: usize) -> Result<Self> {
        Self::build(q, d, n_max, None).map(|(space, _)| space)
    }

    /// Builds the space, reading and populating `cache` when given.
    ///
    /// Invalid cache files are logged, rebuilt and overwritten.
    pub fn with_cache(
        q: f64,
        d: usize,
        n_max: usize,
        cache: Option<&GramCache>,
    ) -> Result<(Self, CacheStats)> {
        Self::build(q, d, n_max, cache)
    }

    fn build(
        q: f64,
        d: usize,
        n_max: usize,
        cache: Option<&GramCache>,
    ) -> Result<(Self, CacheStats)> {
        validate_q(q)?;
        if n_max == 0 {
            return Err(Error::invalid("truncation degree N must be at least 1"));
        }
        checked_level_dim(d, n_max, DEFAULT_MAX_LEVEL_DIM)?;

        let mut stats = CacheStats::default();
        let mut cached: Vec<Option<LevelSpace>> = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let hit = match cache.map(|c| c.load(q, d, n)) {
                None | Some(Ok(None)) => None,
                Some(Ok(Some(level))) => Some(level),
                Some(Err(e)) => {
                    log::warn!("discarding cached level {n}: {e}");
                    stats.rebuilt += 1;
                    None
                }
            };
            cached.push(hit);
        }

        let was_hit: Vec<bool> = cached.iter().map(Option::is_some).collect();

        // Grams climb the recursion sequentially; factorization is per level.
        let mut grams: Vec<Option<DMatrix<f64>>> = Vec::with_capacity(n_max + 1);
        let mut prev = DMatrix::identity(1, 1);
        for (n, hit) in cached.iter().enumerate() {
            if n > 0 {
                prev = match hit {
                    Some(level) => level.gram().clone(),
                    None => symmetrizer_next(&prev, n - 1, d, q),
                };
            }
            grams.push(if hit.is_some() {
                None
            } else {
                Some(prev.clone())
            });
        }
        let levels: Vec<LevelSpace> = cached
            .into_par_iter()
            .zip(grams)
            .enumerate()
            .map(|(n, (hit, gram))| match hit {
                Some(level) => Ok(level),
                None => LevelSpace::new(n, d, gram.expect("gram built for every miss")),
            })
            .collect::<Result<_>>()?;

        if let Some(cache) = cache {
            for (level, hit) in levels.iter().zip(was_hit) {
                if hit {
                    stats.hits += 1;
                } else {
                    stats.misses += 1;
                    cache.store(q, level)?;
                }
            }
        }
        Ok((
            Self {
                q,
                d,
                n_max,
                levels,
            },
            stats,
        ))
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Truncation degree `N`.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn level(&self, n: usize) -> &LevelSpace {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[LevelSpace] {
        &self.levels
    }

    pub fn total_dim(&self) -> usize {
        self.levels.iter().map(LevelSpace::dim).sum()
    }

    /// Dimension of level `n` of the given kind.
    pub fn level_dim(&self, kind: SpaceKind, n: usize) -> usize {
        match kind {
            SpaceKind::Fock => self.levels[n].dim(),
            SpaceKind::HTensorFock => self.d * self.levels[n].dim(),
        }
    }

    /// Cholesky factor of the Gram matrix of level `n` of the given kind.
    pub fn factor(&self, kind: SpaceKind, n: usize) -> KronFactor<'_> {
        match kind {
            SpaceKind::Fock => self.levels[n].factor(1),
            SpaceKind::HTensorFock => self.levels[n].factor(self.d),
        }
    }

    /// Norms of the level-`n` slice of the inclusions
    /// `H ⊗ H^{⊗n}_q -> H^{⊗(n+1)}_q` and `H^{⊗n}_q ⊗ H -> H^{⊗(n+1)}_q`.
    pub fn j_norms(&self, n: usize, solver: &EigenSolver) -> Result<JNorms> {
        if n + 1 > self.n_max {
            return Err(Error::invalid(format!(
                "j at level {n} needs level {} but N = {}",
                n + 1,
                self.n_max
            )));
        }
        let upper = self.levels[n + 1].gram();
        let lower = self.levels[n].factor(self.d);
        let left = inclusion_norms(upper, lower, solver)?;
        let right = inclusion_norms(&move_last_letter_first(upper, self.d, n + 1), lower, solver)?;
        Ok(JNorms {
            level: n,
            left,
            right,
        })
    }

    /// `C1_emp = max ‖j‖ₙ`, `C2_emp = max ‖j⁻¹‖ₙ` over `n < N`, both sides.
    pub fn empirical_constants(&self, solver: &EigenSolver) -> Result<EmpiricalConstants> {
        let per_level = (0..self.n_max)
            .map(|n| self.j_norms(n, solver))
            .collect::<Result<Vec<_>>>()?;
        let c1 = per_level
            .iter()
            .map(|j| j.left.norm.max(j.right.norm))
            .fold(0.0, f64::max);
        let c2 = per_level
            .iter()
            .map(|j| j.left.inverse_norm.max(j.right.inverse_norm))
            .fold(0.0, f64::max);
        Ok(EmpiricalConstants { c1, c2, per_level })
    }
}

/// `(‖j‖, ‖j⁻¹‖)` for one side of the inclusion at one level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionNorms {
    pub norm: f64,
    pub inverse_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JNorms {
    pub level: usize,
    pub left: InclusionNorms,
    pub right: InclusionNorms,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstants {
    pub c1: f64,
    pub c2: f64,
    pub per_level: Vec<JNorms>,
}

/// Extremes of the generalized problem `upper v = λ (I ⊗ P) v`.
fn inclusion_norms(
    upper: &DMatrix<f64>,
    lower: KronFactor<'_>,
    solver: &EigenSolver,
) -> Result<InclusionNorms> {
    let half = lower.l_solve(upper);
    let whitened = lower.l_solve(&half.transpose());
    let e = solver.extremes(&whitened)?;
    if e.min <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            pivot: 0,
            value: e.min,
            threshold: 0.0,
        });
    }
    Ok(InclusionNorms {
        norm: e.max.sqrt(),
        inverse_norm: 1.0 / e.min.sqrt(),
    })
}

/// Conjugates a level-`m` matrix by the relabelling `(w, i) -> (i, w)`,
/// which turns `P⁽ᵐ⁻¹⁾ ⊗ I` into `I ⊗ P⁽ᵐ⁻¹⁾`.
fn move_last_letter_first(a: &DMatrix<f64>, d: usize, m: usize) -> DMatrix<f64> {
    let dim = a.nrows();
    let mut digits = vec![0; m];
    let mut moved = vec![0; m];
    let target: Vec<usize> = (0..dim)
        .map(|idx| {
            unrank(idx, d, &mut digits);
            moved[0] = digits[m - 1];
            moved[1..].copy_from_slice(&digits[..m - 1]);
            rank(&moved, d)
        })
        .collect();
    let mut out = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..dim {
            out[(target[i], target[j])] = a[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::q_integer;

    #[test]
    fn dimensions_and_vacuum() {
        let space = TruncatedFock::new(0.2, 3, 3).unwrap();
        assert_eq!(space.total_dim(), 1 + 3 + 9 + 27);
        assert_eq!(space.level(0).gram()[(0, 0)], 1.0);
        assert_eq!(space.level(1).gram(), &DMatrix::identity(3, 3));
        assert_eq!(space.level_dim(SpaceKind::HTensorFock, 2), 27);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TruncatedFock::new(1.0, 2, 2).is_err());
        assert!(TruncatedFock::new(-1.0, 2, 2).is_err());
        assert!(TruncatedFock::new(0.0, 2, 0).is_err());
        assert!(matches!(
            TruncatedFock::new(0.0, 8, 5),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn j_norm_examples() {
        let solver = EigenSolver::default();
        let space = TruncatedFock::new(0.5, 2, 3).unwrap();
        let j0 = space.j_norms(0, &solver).unwrap();
        assert!((j0.left.norm - 1.0).abs() < 1e-12 && (j0.left.inverse_norm - 1.0).abs() < 1e-12);

        let free = TruncatedFock::new(0.0, 3, 3).unwrap();
        for n in 0..3 {
            let j = free.j_norms(n, &solver).unwrap();
            for side in [j.left, j.right] {
                assert!((side.norm - 1.0).abs() < 1e-12);
                assert!((side.inverse_norm - 1.0).abs() < 1e-12);
            }
        }

        let j2 = space.j_norms(2, &solver).unwrap();
        assert!(j2.left.norm <= 2f64.sqrt() + 1e-9, "{j2:?}");
        assert!(space.j_norms(3, &solver).is_err());
    }

    #[test]
    fn single_letter_j_norm_is_q_integer() {
        // d = 1: ‖j‖ₙ² = [n+1]_q!/[n]_q! = [n+1]_q.
        let solver = EigenSolver::default();
        for q in [-0.6, 0.4] {
            let space = TruncatedFock::new(q, 1, 5).unwrap();
            for n in 0..5 {
                let j = space.j_norms(n, &solver).unwrap();
                let expected = q_integer(n + 1, q).sqrt();
                assert!((j.left.norm - expected).abs() < 1e-12);
                assert!((j.left.inverse_norm - 1.0 / expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constants_grow_with_truncation() {
        let solver = EigenSolver::default();
        let small = TruncatedFock::new(0.5, 2, 3)
            .unwrap()
            .empirical_constants(&solver)
            .unwrap();
        let large = TruncatedFock::new(0.5, 2, 4)
            .unwrap()
            .empirical_constants(&solver)
            .unwrap();
        assert!(large.c1 >= small.c1 && large.c2 >= small.c2);
        assert!(large.c1 <= 2f64.sqrt() + 1e-9);
        let free = TruncatedFock::new(0.0, 2, 4)
            .unwrap()
            .empirical_constants(&solver)
            .unwrap();
        assert!((free.c1 - 1.0).abs() < 1e-12 && (free.c2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cache_round_trip_and_recovery() {
        let dir = tempfile::tempdir().unwrap();
        let cache = GramCache::new(dir.path());
        let (cold, cold_stats) = TruncatedFock::with_cache(0.3, 2, 3, Some(&cache)).unwrap();
        assert_eq!(cold_stats.misses, 4);
        let (warm, warm_stats) = TruncatedFock::with_cache(0.3, 2, 3, Some(&cache)).unwrap();
        assert_eq!((warm_stats.hits, warm_stats.misses), (4, 0));
        for n in 0..=3 {
            assert_eq!(cold.level(n).gram(), warm.level(n).gram());
        }
        let path = cache.path_for(0.3, 2, 2);
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[80] ^= 1;
        std::fs::write(&path, bytes).unwrap();
        let (fixed, stats) = TruncatedFock::with_cache(0.3, 2, 3, Some(&cache)).unwrap();
        assert_eq!(stats.rebuilt, 1);
        assert_eq!(fixed.level(2).gram(), cold.level(2).gram());
        assert!(cache.load(0.3, 2, 2).unwrap().is_some());
    }
}
