//! Weighted-trace block-matrix algebras and their elements.
//!
//! A [`TracialAlgebra`] is a direct sum of full matrix blocks `⊕_k M_{m_k}`
//! carrying the trace `τ(x) = Σ_k λ_k · Tr(x_k)` with strictly positive
//! weights `λ_k`. Elements are [`Op`]s: one complex matrix per block. All
//! L_p machinery in this crate works over these algebras; the commutative
//! case is the all-1×1-blocks special case of the same code path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative spectral cutoff used for supports and q-inverses.
pub const SUPPORT_EPS_REL: f64 = 1e-10;

/// Maximum tolerated relative asymmetry before an input is rejected as
/// non-Hermitian. Inputs below this are symmetrized as `(X + X*)/2`.
pub const HERMITIAN_ASYMMETRY_TOL: f64 = 1e-8;

/// Relative eigenvalue floor in the linear-independence check of [`Subspace`].
pub const RANK_TOL: f64 = 1e-12;

/// A finite-dimensional semifinite tracial algebra `⊕_k M_{m_k}` with
/// trace weights `λ_k > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TracialAlgebra {
    block_dims: Vec<usize>,
    trace_weights: Vec<f64>,
}

impl TracialAlgebra {
    pub fn new(block_dims: Vec<usize>, trace_weights: Vec<f64>) -> Result<Self> {
        if block_dims.is_empty() || block_dims.len() != trace_weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} block dims vs {} trace weights",
                block_dims.len(),
                trace_weights.len()
            )));
        }
        if block_dims.iter().any(|&m| m == 0) {
            return Err(Error::Domain("block dimensions must be >= 1".into()));
        }
        if trace_weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Domain(
                "trace weights must be positive and finite".into(),
            ));
        }
        Ok(Self {
            block_dims,
            trace_weights,
        })
    }

    /// All-1×1-blocks algebra: `L_p` over `m` atoms with the given weights.
    pub fn commutative(weights: Vec<f64>) -> Result<Self> {
        let dims = vec![1usize; weights.len()];
        Self::new(dims, weights)
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn trace_weights(&self) -> &[f64] {
        &self.trace_weights
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Coordinate dimension `Σ_k m_k²` of the algebra as a vector space.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().map(|m| m * m).sum()
    }

    /// `τ(1)` — total mass of the trace.
    pub fn trace_of_identity(&self) -> f64 {
        self.block_dims
            .iter()
            .zip(&self.trace_weights)
            .map(|(&m, &w)| w * m as f64)
            .sum()
    }

    pub fn check_op(&self, a: &Op) -> Result<()> {
        if a.blocks.len() != self.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "op has {} blocks, algebra has {}",
                a.blocks.len(),
                self.num_blocks()
            )));
        }
        for (k, (b, &m)) in a.blocks.iter().zip(&self.block_dims).enumerate() {
            if b.nrows() != m || b.ncols() != m {
                return Err(Error::ShapeMismatch(format!(
                    "block {k}: {}×{} vs algebra dim {m}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(())
    }

    /// Amplified algebra `M_k ⊗ M`: every block dimension multiplied by
    /// `level`, weights unchanged (the `M_k` factor carries plain `Tr`).
    pub fn amplified(&self, level: usize) -> TracialAlgebra {
        TracialAlgebra {
            block_dims: self.block_dims.iter().map(|m| m * level).collect(),
            trace_weights: self.trace_weights.clone(),
        }
    }

    /// Direct sum `M ⊕ N` (blocks concatenated).
    pub fn direct_sum(&self, other: &TracialAlgebra) -> TracialAlgebra {
        let mut dims = self.block_dims.clone();
        dims.extend_from_slice(&other.block_dims);
        let mut w = self.trace_weights.clone();
        w.extend_from_slice(&other.trace_weights);
        TracialAlgebra {
            block_dims: dims,
            trace_weights: w,
        }
    }

    pub fn zero(&self) -> Op {
        Op {
            blocks: self
                .block_dims
                .iter()
                .map(|&m| CMat::zeros(m, m))
                .collect(),
        }
    }

    pub fn identity(&self) -> Op {
        Op {
            blocks: self
                .block_dims
                .iter()
                .map(|&m| CMat::identity(m, m))
                .collect(),
        }
    }

    /// Orthonormal vectorization: block entries row-major, scaled by `√λ_k`,
    /// so the Euclidean inner product of coordinates equals `τ(b* a)`.
    pub fn vectorize(&self, a: &Op) -> CVec {
        let mut v = CVec::zeros(self.dim());
        let mut at = 0;
        for (k, &m) in self.block_dims.iter().enumerate() {
            let s = self.trace_weights[k].sqrt();
            let b = &a.blocks[k];
            for i in 0..m {
                for j in 0..m {
                    v[at] = b[(i, j)] * C64::new(s, 0.0);
                    at += 1;
                }
            }
        }
        v
    }

    pub fn devectorize(&self, v: &CVec) -> Op {
        assert_eq!(v.len(), self.dim(), "coordinate vector length");
        let mut blocks = Vec::with_capacity(self.num_blocks());
        let mut at = 0;
        for (k, &m) in self.block_dims.iter().enumerate() {
            let s = self.trace_weights[k].sqrt();
            let mut b = CMat::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    b[(i, j)] = v[at] / C64::new(s, 0.0);
                    at += 1;
                }
            }
            blocks.push(b);
        }
        Op { blocks }
    }

    /// The op realizing coordinate `idx` of the vectorization basis.
    pub fn basis_op(&self, idx: usize) -> Op {
        let mut v = CVec::zeros(self.dim());
        v[idx] = C64::new(1.0, 0.0);
        self.devectorize(&v)
    }
}

/// `τ(a) = Σ_k λ_k Tr(a_k)`.
pub fn trace(alg: &TracialAlgebra, a: &Op) -> Result<C64> {
    alg.check_op(a)?;
    let mut t = C64::new(0.0, 0.0);
    for (k, b) in a.blocks.iter().enumerate() {
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..b.nrows() {
            tr += b[(i, i)];
        }
        t += tr * C64::new(alg.trace_weights()[k], 0.0);
    }
    Ok(t)
}

/// `τ(b* a)` — the L_2(τ) inner product.
pub fn inner(alg: &TracialAlgebra, a: &Op, b: &Op) -> C64 {
    let mut t = C64::new(0.0, 0.0);
    for (k, (ab, bb)) in a.blocks.iter().zip(&b.blocks).enumerate() {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..ab.nrows() {
            for j in 0..ab.ncols() {
                s += bb[(i, j)].conj() * ab[(i, j)];
            }
        }
        t += s * C64::new(alg.trace_weights()[k], 0.0);
    }
    t
}

/// An element of the algebra (hence of every `L_p(M)`): one matrix per block.
#[derive(Debug, Clone)]
pub struct Op {
    pub blocks: Vec<CMat>,
}

impl Op {
    pub fn from_blocks(blocks: Vec<CMat>) -> Self {
        Op { blocks }
    }

    pub fn adjoint(&self) -> Op {
        Op {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// Blockwise entry transpose — the matrix-level realization of the
    /// opposite-algebra embedding `x ↦ x^t`.
    pub fn transpose_blocks(&self) -> Op {
        Op {
            blocks: self.blocks.iter().map(|b| b.transpose()).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Op {
        Op {
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    pub fn add(&self, other: &Op) -> Op {
        Op {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Op) -> Op {
        Op {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Op) -> Op {
        Op {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Largest absolute entry, used for cheap zero/defect checks.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Op) -> f64 {
        self.sub(other).max_abs()
    }

    /// Entrywise asymmetry `max |X - X*|`.
    pub fn asymmetry(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    /// Hermitian part `(X + X*)/2`.
    pub fn symmetrized(&self) -> Op {
        self.add(&self.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// Direct sum `a ⊕ b` in the direct-sum algebra.
    pub fn direct_sum(&self, other: &Op) -> Op {
        let mut blocks = self.blocks.clone();
        blocks.extend(other.blocks.iter().cloned());
        Op { blocks }
    }

    /// `x ⊕ x^t`: the element of `M ⊕ M^op` the opposite trick doubles to.
    pub fn doubled(&self) -> Op {
        self.direct_sum(&self.transpose_blocks())
    }
}

/// An ordered linearly independent family spanning a subspace `E ⊆ L_p(M)`.
#[derive(Debug, Clone)]
pub struct Subspace {
    algebra: TracialAlgebra,
    basis: Vec<Op>,
}

impl Subspace {
    /// Builds a subspace, verifying shapes and linear independence: the
    /// coordinate Gram matrix `[τ(x_i* x_j)]` must have smallest eigenvalue
    /// at least `RANK_TOL` times its largest.
    pub fn new(algebra: TracialAlgebra, basis: Vec<Op>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Domain("empty basis".into()));
        }
        for op in &basis {
            algebra.check_op(op)?;
        }
        let n = basis.len();
        let mut gram = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] = inner(&algebra, &basis[j], &basis[i]);
            }
        }
        let eigs = gram.symmetric_eigen().eigenvalues;
        let max = eigs.iter().cloned().fold(f64::MIN, f64::max);
        let min = eigs.iter().cloned().fold(f64::MAX, f64::min);
        if !(max > 0.0) || min < RANK_TOL * max {
            return Err(Error::DependentBasis(min / max));
        }
        Ok(Self { algebra, basis })
    }

    pub fn algebra(&self) -> &TracialAlgebra {
        &self.algebra
    }

    pub fn basis(&self) -> &[Op] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Realizes coefficients `c` as the element `Σ_i c_i x_i`.
    pub fn element(&self, coeffs: &CVec) -> Op {
        let mut out = self.algebra.zero();
        for (i, x) in self.basis.iter().enumerate() {
            out = out.add(&x.scale(coeffs[i]));
        }
        out
    }

    /// The subspace `{x ⊕ x^t : x ∈ E}` of `M ⊕ M^op`.
    pub fn doubled(&self) -> Result<Subspace> {
        let alg = self.algebra.direct_sum(&self.algebra);
        let basis = self.basis.iter().map(|x| x.doubled()).collect();
        Subspace::new(alg, basis)
    }
}

/// Realizes `Σ_i coeffs_i ⊗ ops_i` over the amplified algebra
/// `alg.amplified(k)` where every `coeffs_i` is `k×k`.
pub fn realize_amplified(alg: &TracialAlgebra, coeffs: &[CMat], ops: &[Op]) -> (TracialAlgebra, Op) {
    assert_eq!(coeffs.len(), ops.len(), "coefficient/op family lengths");
    let k = if coeffs.is_empty() { 1 } else { coeffs[0].nrows() };
    let amp = alg.amplified(k);
    let mut blocks: Vec<CMat> = alg
        .block_dims()
        .iter()
        .map(|&m| CMat::zeros(k * m, k * m))
        .collect();
    for (alpha, x) in coeffs.iter().zip(ops) {
        assert_eq!(alpha.nrows(), k);
        assert_eq!(alpha.ncols(), k);
        for (c, xb) in x.blocks.iter().enumerate() {
            let m = xb.nrows();
            let target = &mut blocks[c];
            for u in 0..k {
                for v in 0..k {
                    let a = alpha[(u, v)];
                    if a.norm_sqr() == 0.0 {
                        continue;
                    }
                    for r in 0..m {
                        for s in 0..m {
                            target[(u * m + r, v * m + s)] += a * xb[(r, s)];
                        }
                    }
                }
            }
        }
    }
    (amp, Op::from_blocks(blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trace_identity_block() {
        let alg = TracialAlgebra::new(vec![3], vec![1.0]).unwrap();
        let t = trace(&alg, &alg.identity()).unwrap();
        assert!((t - C64::new(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn trace_weighted_sum() {
        let alg = TracialAlgebra::new(vec![1, 1], vec![2.0, 3.0]).unwrap();
        let a = alg.identity();
        let t = trace(&alg, &a).unwrap();
        assert!((t - C64::new(5.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn trace_is_tracial() {
        let alg = TracialAlgebra::new(vec![2, 3], vec![1.0, 0.7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let a = samples::random_op(&alg, &mut rng);
            let b = samples::random_op(&alg, &mut rng);
            let ab = trace(&alg, &a.mul(&b)).unwrap();
            let ba = trace(&alg, &b.mul(&a)).unwrap();
            assert!((ab - ba).norm() < 1e-12, "|τ(ab) − τ(ba)| = {}", (ab - ba).norm());
        }
    }

    #[test]
    fn trace_is_faithful_on_random_elements() {
        let alg = TracialAlgebra::new(vec![2, 2], vec![0.5, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = samples::random_op(&alg, &mut rng);
            let t = trace(&alg, &x.adjoint().mul(&x)).unwrap();
            assert!(t.re > 0.0 && t.im.abs() < 1e-12);
        }
        let z = alg.zero();
        let t = trace(&alg, &z.adjoint().mul(&z)).unwrap();
        assert_eq!(t, C64::new(0.0, 0.0));
    }

    #[test]
    fn trace_shape_mismatch() {
        let alg = TracialAlgebra::new(vec![2], vec![1.0]).unwrap();
        let bad = Op::from_blocks(vec![CMat::zeros(3, 3)]);
        assert!(trace(&alg, &bad).is_err());
    }

    #[test]
    fn vectorize_roundtrip_preserves_inner_product() {
        let alg = TracialAlgebra::new(vec![2, 1], vec![1.5, 0.25]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = samples::random_op(&alg, &mut rng);
        let b = samples::random_op(&alg, &mut rng);
        let va = alg.vectorize(&a);
        let vb = alg.vectorize(&b);
        let dot = vb.dotc(&va);
        let ip = inner(&alg, &a, &b);
        assert!((dot - ip).norm() < 1e-12);
        let back = alg.devectorize(&va);
        assert!(back.max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(TracialAlgebra::new(vec![2], vec![0.0]).is_err());
        assert!(TracialAlgebra::new(vec![2], vec![-1.0]).is_err());
        assert!(TracialAlgebra::new(vec![2], vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn subspace_rejects_dependent_basis() {
        let alg = TracialAlgebra::new(vec![2], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = samples::random_op(&alg, &mut rng);
        let y = x.scale(C64::new(2.0, 1.0));
        assert!(matches!(
            Subspace::new(alg, vec![x, y]),
            Err(Error::DependentBasis(_))
        ));
    }

    #[test]
    fn realize_amplified_matches_kron_trace() {
        let alg = TracialAlgebra::new(vec![2], vec![0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = samples::random_op(&alg, &mut rng);
        let alpha = samples::random_matrix(&mut rng, 3, 3);
        let (amp, big) = realize_amplified(&alg, &[alpha.clone()], &[x.clone()]);
        // Tr⊗τ(α ⊗ x) = Tr(α)·τ(x)
        let t = trace(&amp, &big).unwrap();
        let tr_alpha: C64 = (0..3).map(|i| alpha[(i, i)]).sum();
        let tx = trace(&alg, &x).unwrap();
        assert!((t - tr_alpha * tx).norm() < 1e-12);
    }
}
