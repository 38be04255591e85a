//! Symmetric-group and pair-partition machinery.
//!
//! Permutations are enumerated lazily in lexicographic order so that a pass
//! over `S_8` never materializes 40320 permutations at once. Pair partitions
//! are enumerated with an odometer over the "partner of the first unpaired
//! point" choices, which yields every partition exactly once.

use std::fmt;

use crate::error::{Error, Result};

/// Default upper bound on `n` for enumeration over `S_n`.
pub const DEFAULT_MAX_PERMUTATION_SIZE: usize = 8;

/// Largest ground set accepted by [`pair_partitions`]; `11!! = 10395`.
pub const MAX_PAIR_PARTITION_GROUND: usize = 12;

/// A permutation of `{0, .., n-1}` stored in (zero-based) one-line notation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from zero-based images.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &image in &images {
            if image >= n {
                return Err(Error::invalid(format!(
                    "image {image} out of range for a permutation of size {n}"
                )));
            }
            if std::mem::replace(&mut seen[image], true) {
                return Err(Error::invalid(format!("image {image} repeated")));
            }
        }
        Ok(Self { images })
    }

    /// Builds a permutation from the usual one-based one-line notation,
    /// e.g. `[3, 1, 2]`.
    pub fn from_one_line(one_based: &[usize]) -> Result<Self> {
        let images = one_based
            .iter()
            .map(|&v| {
                v.checked_sub(1)
                    .ok_or_else(|| Error::invalid("one-line notation uses images 1..n"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(images)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// The permutation `i -> n-1-i`, which has the maximal inversion count.
    pub fn reversal(n: usize) -> Self {
        Self {
            images: (0..n).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Zero-based images.
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|v| v + 1).collect()
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.one_line())
    }
}

/// Number of pairs `i < j` with `p(i) > p(j)`.
pub fn inversions(p: &Permutation) -> usize {
    count_inversions(p.images())
}

/// Plain O(n^2) inversion count on a slice of distinct values.
pub(crate) fn count_inversions(values: &[usize]) -> usize {
    let mut count = 0;
    for (i, &a) in values.iter().enumerate() {
        count += values[i + 1..].iter().filter(|&&b| a > b).count();
    }
    count
}

/// Streams `S_n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut successor = current.clone();
        if next_lexicographic(&mut successor) {
            self.next = Some(successor);
        }
        Some(Permutation { images: current })
    }
}

/// Advances `values` to its lexicographic successor; false when `values`
/// was the last (decreasing) arrangement.
fn next_lexicographic(values: &mut [usize]) -> bool {
    let n = values.len();
    if n < 2 {
        return false;
    }
    let Some(pivot) = (0..n - 1).rev().find(|&i| values[i] < values[i + 1]) else {
        return false;
    };
    let swap_with = (pivot + 1..n)
        .rev()
        .find(|&j| values[j] > values[pivot])
        .expect("a larger element exists right of the pivot");
    values.swap(pivot, swap_with);
    values[pivot + 1..].reverse();
    true
}

/// All of `S_n`, subject to the default size budget.
pub fn enumerate_permutations(n: usize) -> Result<Permutations> {
    enumerate_permutations_with_limit(n, DEFAULT_MAX_PERMUTATION_SIZE)
}

pub fn enumerate_permutations_with_limit(n: usize, max_n: usize) -> Result<Permutations> {
    if n > max_n {
        return Err(Error::ResourceLimit {
            what: "permutation size n",
            requested: n,
            limit: max_n,
        });
    }
    Ok(Permutations {
        next: Some((0..n).collect()),
    })
}

/// `sum over S_n of q^inv(sigma)`, by enumeration.
pub fn q_inversion_sum(n: usize, q: f64) -> Result<f64> {
    Ok(enumerate_permutations(n)?
        .map(|p| q.powi(inversions(&p) as i32))
        .sum())
}

/// The q-integer `[k]_q = 1 + q + ... + q^(k-1)`.
pub fn q_integer(k: usize, q: f64) -> f64 {
    (0..k).map(|j| q.powi(j as i32)).sum()
}

/// The q-factorial `[1]_q [2]_q ... [n]_q`.
pub fn q_factorial(n: usize, q: f64) -> f64 {
    (1..=n).map(|k| q_integer(k, q)).product()
}

/// A perfect matching of `{1, .., 2k}` into unordered pairs.
///
/// Pairs are stored normalized (`a < b`) and sorted by their smaller point.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PairPartition {
    pairs: Vec<(usize, usize)>,
}

impl PairPartition {
    /// Validates and normalizes a list of one-based pairs.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        pairs.sort_unstable();
        let ground = 2 * pairs.len();
        let mut seen = vec![false; ground + 1];
        for &(a, b) in &pairs {
            for point in [a, b] {
                if point == 0 || point > ground {
                    return Err(Error::invalid(format!(
                        "point {point} outside the ground set 1..={ground}"
                    )));
                }
                if std::mem::replace(&mut seen[point], true) {
                    return Err(Error::invalid(format!("point {point} paired twice")));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Size of the ground set, `2k`.
    pub fn ground_size(&self) -> usize {
        2 * self.pairs.len()
    }
}

impl fmt::Debug for PairPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.pairs.iter().map(|(a, b)| [a, b]))
            .finish()
    }
}

/// Number of pairs of pairs `{a,b}, {c,d}` with `a < c < b < d`.
pub fn crossings(p: &PairPartition) -> usize {
    let pairs = p.pairs();
    let mut count = 0;
    for (i, &(a, b)) in pairs.iter().enumerate() {
        for &(c, d) in &pairs[i + 1..] {
            if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                count += 1;
            }
        }
    }
    count
}

/// Streams every pair partition of `{1, .., ground}`.
#[derive(Debug, Clone)]
pub struct PairPartitions {
    /// `choices[j]` selects the partner of the smallest point still unpaired
    /// after `j` pairs have been formed; it ranges over `0..ground - 2j - 1`.
    choices: Vec<usize>,
    done: bool,
}

impl PairPartitions {
    fn decode(&self) -> PairPartition {
        let ground = 2 * self.choices.len();
        let mut free: Vec<usize> = (1..=ground).collect();
        let mut pairs = Vec::with_capacity(self.choices.len());
        for &choice in &self.choices {
            let first = free.remove(0);
            let partner = free.remove(choice);
            pairs.push((first, partner));
        }
        PairPartition { pairs }
    }

    fn advance(&mut self) {
        let k = self.choices.len();
        for j in (0..k).rev() {
            let radix = 2 * (k - j) - 1;
            self.choices[j] += 1;
            if self.choices[j] < radix {
                return;
            }
            self.choices[j] = 0;
        }
        self.done = true;
    }
}

impl Iterator for PairPartitions {
    type Item = PairPartition;

    fn next(&mut self) -> Option<PairPartition> {
        if self.done {
            return None;
        }
        let item = self.decode();
        self.advance();
        Some(item)
    }
}

/// All pair partitions of a ground set of the given (even) size.
pub fn pair_partitions(ground: usize) -> Result<PairPartitions> {
    if ground % 2 == 1 {
        return Err(Error::invalid(format!(
            "a set of odd size {ground} has no pair partitions"
        )));
    }
    if ground > MAX_PAIR_PARTITION_GROUND {
        return Err(Error::ResourceLimit {
            what: "pair-partition ground set size",
            requested: ground,
            limit: MAX_PAIR_PARTITION_GROUND,
        });
    }
    Ok(PairPartitions {
        choices: vec![0; ground / 2],
        done: false,
    })
}

/// `(2k-1)!! = 1 * 3 * ... * (2k-1)`.
pub fn double_factorial_odd(k: usize) -> usize {
    (1..=k).map(|j| 2 * j - 1).product()
}
