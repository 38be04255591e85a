use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, RangeInclusive, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::cache::{decode_container, encode_container, push_f64s, read_f64s, PayloadKind};
use crate::fock::word::level_dim;
use crate::fock::{SpaceKind, TruncatedFock};
use crate::linalg::{transport, weighted_adjoint};

fn kind_dim(kind: SpaceKind, d: usize, n: usize) -> usize {
    let dim = level_dim(d, n).expect("level dimension fits in usize");
    match kind {
        SpaceKind::Fock => dim,
        SpaceKind::HTensorFock => d * dim,
    }
}

/// A linear map between truncated spaces, stored as dense blocks keyed by
/// `(out_level, in_level)` in word coordinates.
///
/// Blocks whose output level would exceed the truncation degree are never
/// stored: raising operators are clipped at level `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    d: usize,
    n_max: usize,
    domain: SpaceKind,
    codomain: SpaceKind,
    blocks: BTreeMap<(usize, usize), DMatrix<f64>>,
}

impl FockOperator {
    pub fn zero(d: usize, n_max: usize, domain: SpaceKind, codomain: SpaceKind) -> Self {
        Self {
            d,
            n_max,
            domain,
            codomain,
            blocks: BTreeMap::new(),
        }
    }

    /// Identity on the given levels of one space.
    pub fn identity(
        d: usize,
        n_max: usize,
        kind: SpaceKind,
        levels: RangeInclusive<usize>,
    ) -> Self {
        let mut op = Self::zero(d, n_max, kind, kind);
        for n in levels.filter(|&n| n <= n_max) {
            let dim = kind_dim(kind, d, n);
            op.add_block(n, n, DMatrix::identity(dim, dim));
        }
        op
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn domain(&self) -> SpaceKind {
        self.domain
    }

    pub fn codomain(&self) -> SpaceKind {
        self.codomain
    }

    pub fn in_dim(&self, n: usize) -> usize {
        kind_dim(self.domain, self.d, n)
    }

    pub fn out_dim(&self, n: usize) -> usize {
        kind_dim(self.codomain, self.d, n)
    }

    /// Adds `block` into position `(out, inp)`. Blocks beyond the truncation
    /// are dropped.
    ///
    /// # Panics
    /// If the block shape does not match the level dimensions.
    pub fn add_block(&mut self, out: usize, inp: usize, block: DMatrix<f64>) {
        if out > self.n_max || inp > self.n_max {
            return;
        }
        assert_eq!(
            block.shape(),
            (self.out_dim(out), self.in_dim(inp)),
            "block ({out}, {inp}) has the wrong shape"
        );
        match self.blocks.get_mut(&(out, inp)) {
            Some(existing) => *existing += block,
            None => {
                self.blocks.insert((out, inp), block);
            }
        }
    }

    pub fn block(&self, out: usize, inp: usize) -> Option<&DMatrix<f64>> {
        self.blocks.get(&(out, inp))
    }

    pub fn blocks(&self) -> impl Iterator<Item = ((usize, usize), &DMatrix<f64>)> {
        self.blocks.iter().map(|(&k, v)| (k, v))
    }

    /// Largest `|out_level - in_level|` over stored blocks.
    pub fn band(&self) -> usize {
        self.blocks
            .keys()
            .map(|&(o, i)| o.abs_diff(i))
            .max()
            .unwrap_or(0)
    }

    /// Max-entry norm over all blocks.
    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(|b| b.amax()).fold(0.0, f64::max)
    }

    fn filtered(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .filter(|(&(o, i), _)| keep(o, i))
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
            ..Self::zero(self.d, self.n_max, self.domain, self.codomain)
        }
    }

    /// Keeps only blocks whose input level lies in `levels`.
    pub fn restrict_input(&self, levels: RangeInclusive<usize>) -> Self {
        self.filtered(|_, i| levels.contains(&i))
    }

    /// Keeps only blocks whose output level lies in `levels`.
    pub fn restrict_output(&self, levels: RangeInclusive<usize>) -> Self {
        self.filtered(|o, _| levels.contains(&o))
    }

    /// Plain matrix transpose (standard, not q-weighted, geometry).
    pub fn transpose(&self) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|(&(o, i), b)| ((i, o), b.transpose()))
                .collect(),
            ..Self::zero(self.d, self.n_max, self.codomain, self.domain)
        }
    }

    fn check_space(&self, space: &TruncatedFock) {
        assert!(
            space.d() == self.d && space.n_max() >= self.n_max,
            "operator and space disagree on d or N"
        );
    }

    /// Adjoint with respect to the q-inner products of domain and codomain.
    pub fn q_adjoint(&self, space: &TruncatedFock) -> Self {
        self.check_space(space);
        let mut adj = Self::zero(self.d, self.n_max, self.codomain, self.domain);
        for (&(o, i), b) in &self.blocks {
            let block = weighted_adjoint(
                b,
                space.factor(self.codomain, o),
                space.factor(self.domain, i),
            );
            adj.add_block(i, o, block);
        }
        adj
    }

    /// The same operator in q-orthonormal coordinates (`y = Lᵀ x` per level).
    pub fn transported(&self, space: &TruncatedFock) -> Self {
        self.check_space(space);
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|(&(o, i), b)| {
                    let t = transport(
                        b,
                        space.factor(self.codomain, o),
                        space.factor(self.domain, i),
                    );
                    ((o, i), t)
                })
                .collect(),
            ..self.clone_empty()
        }
    }

    fn clone_empty(&self) -> Self {
        Self::zero(self.d, self.n_max, self.domain, self.codomain)
    }

    pub fn apply(&self, x: &FockVector) -> FockVector {
        assert_eq!(x.kind, self.domain, "vector lives on the wrong space");
        let mut out = FockVector::zeros(self.d, self.n_max, self.codomain);
        for (&(o, i), b) in &self.blocks {
            if let Some(xi) = x.levels.get(i) {
                out.levels[o] += b * xi;
            }
        }
        out
    }

    /// `Σ_k v_k ⊗ A_k` for Fock operators `A_k`: the result maps into
    /// `H ⊗ F`, with chunk `j` of each output block equal to `Σ_k v_k[j] A_k`.
    pub fn tensor_sum(vectors: &[DVector<f64>], ops: &[FockOperator]) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::invalid("tensor_sum needs at least one operator"))?;
        if vectors.len() != ops.len() {
            return Err(Error::invalid("one H-vector per operator is required"));
        }
        let (d, n_max) = (first.d, first.n_max);
        let mut out = Self::zero(d, n_max, SpaceKind::Fock, SpaceKind::HTensorFock);
        for (v, op) in vectors.iter().zip(ops) {
            if op.domain != SpaceKind::Fock || op.codomain != SpaceKind::Fock || op.d != d {
                return Err(Error::invalid("tensor_sum takes Fock -> Fock operators"));
            }
            if v.len() != d {
                return Err(Error::invalid("H-vectors must have length d"));
            }
            for (&(o, i), b) in &op.blocks {
                let rows = b.nrows();
                let mut stacked = DMatrix::zeros(d * rows, b.ncols());
                for (j, &c) in v.iter().enumerate() {
                    if c != 0.0 {
                        stacked.rows_mut(j * rows, rows).copy_from(&(b * c));
                    }
                }
                out.add_block(o, i, stacked);
            }
        }
        Ok(out)
    }

    /// Level-block triplets `(out_level, in_level, block)`.
    pub fn to_triplets(&self) -> Vec<(usize, usize, DMatrix<f64>)> {
        self.blocks
            .iter()
            .map(|(&(o, i), b)| (o, i, b.clone()))
            .collect()
    }

    /// Encodes the operator in the versioned binary container.
    ///
    /// Payload: domain and codomain tags (u32 each, 0 = Fock, 1 = H⊗F),
    /// block count (u32), then per block `out, in, rows, cols` (u32 each)
    /// followed by the row-major f64 entries.
    pub fn encode(&self, q: f64) -> Vec<u8> {
        let tag = |k: SpaceKind| match k {
            SpaceKind::Fock => 0u32,
            SpaceKind::HTensorFock => 1u32,
        };
        let mut payload = Vec::new();
        payload.extend_from_slice(&tag(self.domain).to_le_bytes());
        payload.extend_from_slice(&tag(self.codomain).to_le_bytes());
        payload.extend_from_slice(&(self.blocks.len() as u32).to_le_bytes());
        for (&(o, i), b) in &self.blocks {
            for v in [o, i, b.nrows(), b.ncols()] {
                payload.extend_from_slice(&(v as u32).to_le_bytes());
            }
            push_f64s(&mut payload, b);
        }
        encode_container(PayloadKind::OperatorBlocks, q, self.d, self.n_max, &payload)
    }

    /// Inverse of [`FockOperator::encode`]; returns the operator and its `q`.
    pub fn decode(bytes: &[u8]) -> Result<(Self, f64)> {
        let path = std::path::Path::new("<operator>");
        let (header, payload) = decode_container(path, bytes)?;
        if header.kind != PayloadKind::OperatorBlocks {
            return Err(Error::invalid("container does not hold operator blocks"));
        }
        let bad = || Error::invalid("truncated operator payload");
        let mut pos = 0usize;
        let next_u32 = |pos: &mut usize| -> Result<usize> {
            let bytes = payload.get(*pos..*pos + 4).ok_or_else(bad)?;
            *pos += 4;
            Ok(u32::from_le_bytes(bytes.try_into().unwrap()) as usize)
        };
        let kind = |t: usize| match t {
            0 => Ok(SpaceKind::Fock),
            1 => Ok(SpaceKind::HTensorFock),
            _ => Err(Error::invalid("unknown space tag")),
        };
        let domain = kind(next_u32(&mut pos)?)?;
        let codomain = kind(next_u32(&mut pos)?)?;
        let count = next_u32(&mut pos)?;
        let mut op = Self::zero(header.d as usize, header.n as usize, domain, codomain);
        for _ in 0..count {
            let (o, i) = (next_u32(&mut pos)?, next_u32(&mut pos)?);
            let (rows, cols) = (next_u32(&mut pos)?, next_u32(&mut pos)?);
            let len = 8 * rows * cols;
            let data = payload.get(pos..pos + len).ok_or_else(bad)?;
            pos += len;
            if o > op.n_max || i > op.n_max || (rows, cols) != (op.out_dim(o), op.in_dim(i)) {
                return Err(Error::invalid("operator block does not fit its levels"));
            }
            op.add_block(o, i, read_f64s(data, rows, cols));
        }
        Ok((op, header.q))
    }

    fn assert_compatible(&self, other: &Self) {
        assert!(
            self.d == other.d && self.n_max == other.n_max,
            "operators act on different truncations"
        );
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;

    fn add(self, rhs: &FockOperator) -> FockOperator {
        self.assert_compatible(rhs);
        assert!(self.domain == rhs.domain && self.codomain == rhs.codomain);
        let mut out = self.clone();
        for (&(o, i), b) in &rhs.blocks {
            out.add_block(o, i, b.clone());
        }
        out
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;

    fn sub(self, rhs: &FockOperator) -> FockOperator {
        self + &(-rhs)
    }
}

impl Neg for &FockOperator {
    type Output = FockOperator;

    fn neg(self) -> FockOperator {
        self * -1.0
    }
}

impl Mul<f64> for &FockOperator {
    type Output = FockOperator;

    fn mul(self, c: f64) -> FockOperator {
        FockOperator {
            blocks: self.blocks.iter().map(|(&k, b)| (k, b * c)).collect(),
            ..self.clone_empty()
        }
    }
}

/// Composition: `(a * b) x = a (b x)`.
impl Mul for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: &FockOperator) -> FockOperator {
        self.assert_compatible(rhs);
        assert_eq!(
            rhs.codomain, self.domain,
            "composition across mismatched spaces"
        );
        let mut out = FockOperator::zero(self.d, self.n_max, rhs.domain, self.codomain);
        for (&(mid, i), b) in &rhs.blocks {
            for (&(o, _), a) in self.blocks.iter().filter(|(&(_, m), _)| m == mid) {
                out.add_block(o, i, a * b);
            }
        }
        out
    }
}

/// A vector of a truncated space, one coefficient block per level.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub kind: SpaceKind,
    pub levels: Vec<DVector<f64>>,
}

impl FockVector {
    pub fn zeros(d: usize, n_max: usize, kind: SpaceKind) -> Self {
        Self {
            kind,
            levels: (0..=n_max)
                .map(|n| DVector::zeros(kind_dim(kind, d, n)))
                .collect(),
        }
    }

    /// The vacuum `Ω` of `F_N`.
    pub fn vacuum(d: usize, n_max: usize) -> Self {
        let mut v = Self::zeros(d, n_max, SpaceKind::Fock);
        v.levels[0][0] = 1.0;
        v
    }

    /// The basis tensor labelled by the word at `index` of level `n`.
    pub fn basis(d: usize, n_max: usize, kind: SpaceKind, n: usize, index: usize) -> Self {
        let mut v = Self::zeros(d, n_max, kind);
        v.levels[n][index] = 1.0;
        v
    }

    /// `⟨self, other⟩` in the q-geometry of `space`.
    pub fn q_inner(&self, other: &FockVector, space: &TruncatedFock) -> f64 {
        assert_eq!(self.kind, other.kind);
        self.levels
            .iter()
            .zip(&other.levels)
            .enumerate()
            .map(|(n, (a, b))| {
                let f = space.factor(self.kind, n);
                let (ya, yb) = (
                    f.lt_mul(&DMatrix::from_column_slice(a.len(), 1, a.as_slice())),
                    f.lt_mul(&DMatrix::from_column_slice(b.len(), 1, b.as_slice())),
                );
                ya.dot(&yb)
            })
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.levels.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }
}
