//! Seeded random matrices, operators and subspaces for experiments and tests.
//!
//! Everything here is deterministic given the caller's RNG; commands that
//! sample take an explicit seed and parallel trials must partition the seed
//! stream (`ChaCha8Rng::set_stream`).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{C64, CMat, Op, Subspace, TracialAlgebra};
use crate::error::Result;

/// Standard complex Gaussian with `E|z|² = 1`.
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re / 2f64.sqrt(), im / 2f64.sqrt())
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, m: usize) -> CMat {
    let a = random_matrix(rng, m, m);
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn random_psd<R: Rng>(rng: &mut R, m: usize, rank: usize) -> CMat {
    let r = rank.min(m).max(1);
    let a = random_matrix(rng, m, r);
    &a * a.adjoint()
}

/// Haar-ish unitary via QR of a Gaussian matrix with phase-fixed diagonal.
pub fn random_unitary<R: Rng>(rng: &mut R, m: usize) -> CMat {
    let a = random_matrix(rng, m, m);
    let qr = a.qr();
    let q = qr.q();
    let r = qr.r();
    // normalize column phases so the distribution is Haar
    let mut phases = CMat::zeros(m, m);
    for i in 0..m {
        let d = r[(i, i)];
        let ph = if d.norm() > 0.0 {
            d / C64::new(d.norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        phases[(i, i)] = ph;
    }
    q * phases
}

pub fn random_op<R: Rng>(alg: &TracialAlgebra, rng: &mut R) -> Op {
    Op::from_blocks(
        alg.block_dims()
            .iter()
            .map(|&m| random_matrix(rng, m, m))
            .collect(),
    )
}

pub fn random_hermitian_op<R: Rng>(alg: &TracialAlgebra, rng: &mut R) -> Op {
    Op::from_blocks(
        alg.block_dims()
            .iter()
            .map(|&m| random_hermitian(rng, m))
            .collect(),
    )
}

pub fn random_psd_op<R: Rng>(alg: &TracialAlgebra, rng: &mut R) -> Op {
    Op::from_blocks(
        alg.block_dims()
            .iter()
            .map(|&m| random_psd(rng, m, m))
            .collect(),
    )
}

/// Blockwise unitary (hence trace-preserving under conjugation).
pub fn random_block_unitary<R: Rng>(alg: &TracialAlgebra, rng: &mut R) -> Op {
    Op::from_blocks(
        alg.block_dims()
            .iter()
            .map(|&m| random_unitary(rng, m))
            .collect(),
    )
}

/// Dense Gaussian subspace with `n` generators.
pub fn random_subspace<R: Rng>(alg: &TracialAlgebra, n: usize, rng: &mut R) -> Result<Subspace> {
    let basis: Vec<Op> = (0..n).map(|_| random_op(alg, rng)).collect();
    Subspace::new(alg.clone(), basis)
}

/// Diagonal projection with the requested rank per block.
pub fn corner_projection(alg: &TracialAlgebra, ranks: &[usize]) -> Op {
    Op::from_blocks(
        alg.block_dims()
            .iter()
            .zip(ranks)
            .map(|(&m, &r)| {
                let mut e = CMat::zeros(m, m);
                for i in 0..r.min(m) {
                    e[(i, i)] = C64::new(1.0, 0.0);
                }
                e
            })
            .collect(),
    )
}

/// Subspace supported inside the corner `eMe`; its square function is
/// rank-deficient whenever some block rank is strictly below the block
/// dimension, which exercises the q-inverse path for p < 2.
pub fn random_corner_subspace<R: Rng>(
    alg: &TracialAlgebra,
    n: usize,
    ranks: &[usize],
    rng: &mut R,
) -> Result<Subspace> {
    let e = corner_projection(alg, ranks);
    let basis: Vec<Op> = (0..n)
        .map(|_| e.mul(&random_op(alg, rng)).mul(&e))
        .collect();
    Subspace::new(alg.clone(), basis)
}

/// Default corner ranks: every block of dimension ≥ 2 loses one dimension.
pub fn default_corner_ranks(alg: &TracialAlgebra) -> Vec<usize> {
    alg.block_dims()
        .iter()
        .map(|&m| if m > 1 { m - 1 } else { 1 })
        .collect()
}
