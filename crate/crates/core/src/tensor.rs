//! Dense component arrays of rank at most four.
//!
//! Components are stored row-major by slot: slot 0 varies slowest. Each slot
//! carries a variance flag so that a plain (Kronecker) trace is only taken
//! across a covariant/contravariant pair, while a metric-weighted trace
//! contracts two covariant slots through `g^{ij}`.

use nalgebra::DMatrix;
use thiserror::Error;

pub const MAX_RANK: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("slot {slot} out of range for a rank-{rank} tensor")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("cannot contract a slot with itself")]
    SameSlot,
    #[error("slots {0} and {1} have incompatible variance for this contraction")]
    VarianceMismatch(usize, usize),
    #[error("expected rank {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("rank {0} exceeds the supported maximum of 4")]
    RankTooLarge(usize),
    #[error("matrix is not symmetric: |g[{i}][{j}] - g[{j}][{i}]| = {gap}")]
    Asymmetric { i: usize, j: usize, gap: f64 },
    #[error("matrix is not positive definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Covariant,
    Contravariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dim: usize,
    variance: Vec<Variance>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(dim: usize, variance: &[Variance]) -> Self {
        assert!(variance.len() <= MAX_RANK, "rank above {MAX_RANK}");
        Self {
            dim,
            variance: variance.to_vec(),
            data: vec![0.0; dim.pow(variance.len() as u32)],
        }
    }

    /// Fully covariant zero tensor.
    pub fn covariant(dim: usize, rank: usize) -> Self {
        Self::zeros(dim, &vec![Variance::Covariant; rank])
    }

    pub fn from_fn(dim: usize, variance: &[Variance], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, variance);
        let mut idx = vec![0usize; variance.len()];
        for k in 0..t.data.len() {
            t.unflatten(k, &mut idx);
            t.data[k] = f(&idx);
        }
        t
    }

    pub fn covariant_from_fn(dim: usize, rank: usize, f: impl FnMut(&[usize]) -> f64) -> Self {
        Self::from_fn(dim, &vec![Variance::Covariant; rank], f)
    }

    pub fn from_data(dim: usize, variance: &[Variance], data: Vec<f64>) -> Result<Self, TensorError> {
        if variance.len() > MAX_RANK {
            return Err(TensorError::RankTooLarge(variance.len()));
        }
        let want = dim.pow(variance.len() as u32);
        if data.len() != want {
            return Err(TensorError::DimensionMismatch(data.len(), want));
        }
        Ok(Self {
            dim,
            variance: variance.to_vec(),
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn components(&self) -> &[f64] {
        &self.data
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Value of a rank-0 tensor.
    pub fn value(&self) -> f64 {
        debug_assert_eq!(self.rank(), 0);
        self.data[0]
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    fn unflatten(&self, mut k: usize, idx: &mut [usize]) {
        for slot in (0..idx.len()).rev() {
            idx[slot] = k % self.dim.max(1);
            k /= self.dim.max(1);
        }
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], v: f64) {
        let k = self.offset(idx);
        self.data[k] = v;
    }

    #[inline]
    pub fn add_at(&mut self, idx: &[usize], v: f64) {
        let k = self.offset(idx);
        self.data[k] += v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        assert_eq!(self.rank(), other.rank(), "rank mismatch");
        Self {
            dim: self.dim,
            variance: self.variance.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            variance: self.variance.clone(),
            data: self.data.iter().map(|v| s * v).collect(),
        }
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// Reorders slots: `out[idx] = self[idx ∘ perm]`, i.e. slot `s` of the
    /// result is slot `perm[s]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rank());
        let variance: Vec<Variance> = perm.iter().map(|&p| self.variance[p]).collect();
        let mut src = vec![0usize; self.rank()];
        Self::from_fn(self.dim, &variance, |idx| {
            for (s, &p) in perm.iter().enumerate() {
                src[p] = idx[s];
            }
            self.get(&src)
        })
    }

    /// Acts on one slot with a matrix: `out[.., k, ..] = Σ_s self[.., s, ..] m[(s, k)]`.
    ///
    /// With `m = P` (mixed components `P^s_k`) on a covariant slot this realizes
    /// the argument substitution `z ↦ P z`.
    pub fn transform_slot(&self, slot: usize, m: &DMatrix<f64>) -> Result<Self, TensorError> {
        if slot >= self.rank() {
            return Err(TensorError::SlotOutOfRange {
                slot,
                rank: self.rank(),
            });
        }
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(TensorError::DimensionMismatch(m.nrows(), self.dim));
        }
        let n = self.dim;
        let mut src = vec![0usize; self.rank()];
        Ok(Self::from_fn(n, &self.variance, |idx| {
            src.copy_from_slice(idx);
            let mut acc = 0.0;
            for s in 0..n {
                src[slot] = s;
                acc += self.get(&src) * m[(s, idx[slot])];
            }
            acc
        }))
    }

    /// Contracts two slots. With a metric, both slots must be covariant and
    /// the trace is weighted by `g^{ij}`; without one, the slots must have
    /// opposite variance.
    pub fn contract(
        &self,
        slot_a: usize,
        slot_b: usize,
        metric: Option<&MetricPair>,
    ) -> Result<Self, TensorError> {
        let rank = self.rank();
        for s in [slot_a, slot_b] {
            if s >= rank {
                return Err(TensorError::SlotOutOfRange { slot: s, rank });
            }
        }
        if slot_a == slot_b {
            return Err(TensorError::SameSlot);
        }
        let (va, vb) = (self.variance[slot_a], self.variance[slot_b]);
        match metric {
            Some(_) if va != Variance::Covariant || vb != Variance::Covariant => {
                return Err(TensorError::VarianceMismatch(slot_a, slot_b))
            }
            None if va == vb => return Err(TensorError::VarianceMismatch(slot_a, slot_b)),
            _ => {}
        }
        if let Some(m) = metric {
            if m.dim() != self.dim {
                return Err(TensorError::DimensionMismatch(m.dim(), self.dim));
            }
        }
        let n = self.dim;
        let kept: Vec<usize> = (0..rank).filter(|&s| s != slot_a && s != slot_b).collect();
        let variance: Vec<Variance> = kept.iter().map(|&s| self.variance[s]).collect();
        let mut src = vec![0usize; rank];
        Ok(Self::from_fn(n, &variance, |idx| {
            for (k, &s) in kept.iter().enumerate() {
                src[s] = idx[k];
            }
            let mut acc = 0.0;
            for i in 0..n {
                src[slot_a] = i;
                match metric {
                    Some(m) => {
                        for j in 0..n {
                            let w = m.g_inv[(i, j)];
                            if w != 0.0 {
                                src[slot_b] = j;
                                acc += w * self.get(&src);
                            }
                        }
                    }
                    None => {
                        src[slot_b] = i;
                        acc += self.get(&src);
                    }
                }
            }
            acc
        }))
    }

    /// Lowers a contravariant slot with `g`.
    pub fn lower(&self, slot: usize, metric: &MetricPair) -> Result<Self, TensorError> {
        self.move_index(slot, &metric.g, Variance::Contravariant, Variance::Covariant)
    }

    /// Raises a covariant slot with `g^{-1}`.
    pub fn raise(&self, slot: usize, metric: &MetricPair) -> Result<Self, TensorError> {
        self.move_index(slot, &metric.g_inv, Variance::Covariant, Variance::Contravariant)
    }

    fn move_index(
        &self,
        slot: usize,
        m: &DMatrix<f64>,
        from: Variance,
        to: Variance,
    ) -> Result<Self, TensorError> {
        if slot >= self.rank() {
            return Err(TensorError::SlotOutOfRange {
                slot,
                rank: self.rank(),
            });
        }
        if self.variance[slot] != from {
            return Err(TensorError::VarianceMismatch(slot, slot));
        }
        let mut out = self.transform_slot(slot, m)?;
        out.variance[slot] = to;
        Ok(out)
    }

    /// `out(x,y,z,w) = t(x,y,z,w) + t(y,z,x,w) + t(z,x,y,w)`.
    pub fn cyclic_sum_3(&self) -> Result<Self, TensorError> {
        if self.rank() != 4 {
            return Err(TensorError::RankMismatch {
                expected: 4,
                got: self.rank(),
            });
        }
        Ok(Self::from_fn(self.dim, &self.variance, |ix| {
            let (i, j, k, w) = (ix[0], ix[1], ix[2], ix[3]);
            self.get(&[i, j, k, w]) + self.get(&[j, k, i, w]) + self.get(&[k, i, j, w])
        }))
    }

    /// Cyclic sum over all three slots of a rank-3 tensor.
    pub fn cyclic_sum_rank3(&self) -> Result<Self, TensorError> {
        if self.rank() != 3 {
            return Err(TensorError::RankMismatch {
                expected: 3,
                got: self.rank(),
            });
        }
        Ok(Self::from_fn(self.dim, &self.variance, |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            self.get(&[i, j, k]) + self.get(&[j, k, i]) + self.get(&[k, i, j])
        }))
    }
}

/// A metric together with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPair {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
}

impl MetricPair {
    pub fn new(g: DMatrix<f64>) -> Result<Self, TensorError> {
        let g_inv = invert_spd(&g)?;
        Ok(Self { g, g_inv })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn identity(n: usize) -> Self {
        Self {
            g: DMatrix::identity(n, n),
            g_inv: DMatrix::identity(n, n),
        }
    }

    /// `max |g g^{-1} - I|`.
    pub fn inverse_residual(&self) -> f64 {
        let n = self.dim();
        (&self.g * &self.g_inv - DMatrix::<f64>::identity(n, n)).amax()
    }
}

/// Inverse of a symmetric positive definite matrix via an `L D Lᵀ` factorization.
///
/// Symmetry is required exactly; a non-positive pivot is reported with its
/// index and value.
pub fn invert_spd(g: &DMatrix<f64>) -> Result<DMatrix<f64>, TensorError> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(TensorError::DimensionMismatch(g.nrows(), g.ncols()));
    }
    for i in 0..n {
        for j in i + 1..n {
            let gap = (g[(i, j)] - g[(j, i)]).abs();
            if gap != 0.0 {
                return Err(TensorError::Asymmetric { i, j, gap });
            }
        }
    }
    // g = L D Lᵀ with unit lower-triangular L; no square roots, so diagonal
    // metrics invert exactly.
    let mut l = DMatrix::<f64>::identity(n, n);
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = g[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * d[k];
        }
        if !(dj > 0.0) {
            return Err(TensorError::NotPositiveDefinite { pivot: j, value: dj });
        }
        d[j] = dj;
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)] * d[k];
            }
            l[(i, j)] = s / dj;
        }
    }
    // Solve L D Lᵀ X = I column by column.
    let mut inv = DMatrix::<f64>::zeros(n, n);
    let mut y = vec![0.0; n];
    for c in 0..n {
        for i in 0..n {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i] / d[i];
            for k in i + 1..n {
                s -= l[(k, i)] * inv[(k, c)];
            }
            inv[(i, c)] = s;
        }
    }
    // Symmetrize to remove rounding asymmetry.
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    Ok(inv)
}
