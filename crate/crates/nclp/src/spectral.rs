//! Spectral functional calculus: Schatten norms, polar decomposition,
//! support projections, q-inverses and square functions.
//!
//! Singular values are computed from the Hermitian eigendecomposition of
//! `a* a`; all fractional powers go through eigendecompositions with a
//! relative support cutoff (`SUPPORT_EPS_REL` by default). The paper-level
//! identities `q X^r = X^r q = X^r` and `X X⁻¹_q = q` hold up to that
//! cutoff, which is the price of working with exact supports numerically.

use nalgebra::DVector;

use crate::algebra::{
    C64, CMat, Op, Subspace, TracialAlgebra, HERMITIAN_ASYMMETRY_TOL, SUPPORT_EPS_REL,
};
use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn eigh(m: &CMat) -> (DVector<f64>, CMat) {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let k = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals = DVector::from_fn(k, |i, _| eig.eigenvalues[order[i]]);
    let vecs = CMat::from_fn(k, k, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Singular values of a plain matrix, descending.
pub fn singular_values_mat(a: &CMat) -> Vec<f64> {
    if let Some(svd) = a.clone().try_svd(false, false, f64::EPSILON * 4.0, 200) {
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return sv;
    }
    // fallback: eigh of a*a (loses accuracy on tiny singular values)
    let (vals, _) = eigh(&(a.adjoint() * a));
    vals.iter().map(|&l| l.max(0.0).sqrt()).collect()
}

/// Truncated singular triple `(U, s, V)` with `a ≈ U diag(s) V*`, keeping
/// singular values above `eps_rel` times the largest.
pub fn svd_trunc(a: &CMat, eps_rel: f64) -> (CMat, Vec<f64>, CMat) {
    let m = a.nrows();
    let (uf, sf, vf) = match a.clone().try_svd(true, true, f64::EPSILON * 4.0, 200) {
        Some(svd) => (svd.u.unwrap(), svd.singular_values, svd.v_t.unwrap().adjoint()),
        None => {
            let (vals, vecs) = eigh(&(a.adjoint() * a));
            let k = vals.len();
            let s = DVector::from_fn(k, |i, _| vals[i].max(0.0).sqrt());
            let mut u = CMat::zeros(m, k);
            for i in 0..k {
                if s[i] > 0.0 {
                    let ui = (a * vecs.column(i)) / C64::new(s[i], 0.0);
                    u.set_column(i, &ui);
                }
            }
            (u, s, vecs)
        }
    };
    let smax = sf.iter().cloned().fold(0.0, f64::max);
    let cut = eps_rel * smax;
    let mut keep: Vec<usize> = (0..sf.len()).filter(|&i| sf[i] > cut && sf[i] > 0.0).collect();
    keep.sort_by(|&x, &y| sf[y].partial_cmp(&sf[x]).unwrap());
    let r = keep.len();
    let mut u = CMat::zeros(m, r);
    let mut v = CMat::zeros(a.ncols(), r);
    let mut s = Vec::with_capacity(r);
    for (col, &i) in keep.iter().enumerate() {
        s.push(sf[i]);
        u.set_column(col, &uf.column(i));
        v.set_column(col, &vf.column(i));
    }
    (u, s, v)
}

/// Schatten p-norm of a plain matrix (unit weight).
pub fn schatten_norm_mat(a: &CMat, p: f64) -> f64 {
    let sv = singular_values_mat(a);
    if p.is_infinite() {
        return sv.first().copied().unwrap_or(0.0);
    }
    sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Wirtinger gradient `G` of `A ↦ ‖A‖_p` with `d‖A‖ = 2 Re Tr(G* dA)`…
/// scaled so that a step along `G` is steepest ascent. Subgradient at
/// p = 1 and p = ∞.
pub fn schatten_grad_mat(a: &CMat, p: f64) -> CMat {
    let (u, s, v) = svd_trunc(a, 1e-13);
    if s.is_empty() {
        return CMat::zeros(a.nrows(), a.ncols());
    }
    if p.is_infinite() {
        let u0 = u.column(0);
        let v0 = v.column(0);
        return u0 * v0.adjoint() * C64::new(0.5, 0.0);
    }
    let norm = s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p);
    if norm == 0.0 {
        return CMat::zeros(a.nrows(), a.ncols());
    }
    let d = CMat::from_fn(s.len(), s.len(), |i, j| {
        if i == j {
            C64::new(s[i].powf(p - 1.0) * norm.powf(1.0 - p) * 0.5, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &u * d * v.adjoint()
}

/// Spectral map `λ ↦ λ^r` on a PSD matrix, zero below `eps_rel · λ_max`.
pub fn psd_power_mat(m: &CMat, r: f64, eps_rel: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let lmax = vals.iter().cloned().fold(0.0, f64::max);
    let cut = eps_rel * lmax;
    let k = vals.len();
    let d = CMat::from_fn(k, k, |i, j| {
        if i == j && vals[i] > cut && vals[i] > 0.0 {
            C64::new(vals[i].powf(r), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &vecs * d * vecs.adjoint()
}

fn validate_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("p must satisfy p ≥ 1 or p = ∞, got {p}")));
    }
    Ok(())
}

/// `τ(|a|^p)^{1/p}`; for p = ∞ the largest singular value.
pub fn schatten_norm(alg: &TracialAlgebra, a: &Op, p: f64) -> Result<f64> {
    alg.check_op(a)?;
    validate_p(p)?;
    let mut per_block: Vec<Vec<f64>> = Vec::with_capacity(a.blocks.len());
    for b in &a.blocks {
        per_block.push(singular_values_mat(b));
    }
    if p.is_infinite() {
        return Ok(per_block
            .iter()
            .flat_map(|sv| sv.iter().copied())
            .fold(0.0, f64::max));
    }
    let total: f64 = per_block
        .iter()
        .zip(alg.trace_weights())
        .map(|(sv, &w)| w * sv.iter().map(|s| s.powf(p)).sum::<f64>())
        .sum();
    Ok(total.powf(1.0 / p))
}

/// Polar decomposition `a = v·|a|` with `v* v = supp(|a|)`.
pub fn polar(alg: &TracialAlgebra, a: &Op) -> Result<(Op, Op)> {
    alg.check_op(a)?;
    let smax = schatten_norm(alg, a, f64::INFINITY)?;
    let mut vs = Vec::with_capacity(a.blocks.len());
    let mut abss = Vec::with_capacity(a.blocks.len());
    for b in &a.blocks {
        let (u, s, v) = svd_trunc(b, if smax > 0.0 { SUPPORT_EPS_REL } else { 1.0 });
        // rescale cutoff to the global ‖a‖_∞
        let cut = SUPPORT_EPS_REL * smax;
        let mut vmat = CMat::zeros(b.nrows(), b.ncols());
        let mut amat = CMat::zeros(b.nrows(), b.ncols());
        for (i, &si) in s.iter().enumerate() {
            if si <= cut {
                continue;
            }
            let ui = u.column(i);
            let vi = v.column(i);
            vmat += ui * vi.adjoint();
            amat += vi * vi.adjoint() * C64::new(si, 0.0);
        }
        vs.push(vmat);
        abss.push(amat);
    }
    Ok((Op::from_blocks(vs), Op::from_blocks(abss)))
}

/// Support projection `q = 1_(cut,∞)(|a|)` with `cut = eps_rel · ‖a‖_∞`.
pub fn support(alg: &TracialAlgebra, a: &Op, eps_rel: f64) -> Result<Op> {
    alg.check_op(a)?;
    if !(eps_rel > 0.0 && eps_rel < 1.0) {
        return Err(Error::Domain(format!("eps_rel must lie in (0,1), got {eps_rel}")));
    }
    let smax = schatten_norm(alg, a, f64::INFINITY)?;
    if smax == 0.0 {
        return Ok(alg.zero());
    }
    let cut = eps_rel * smax;
    let mut blocks = Vec::with_capacity(a.blocks.len());
    for b in &a.blocks {
        let (_, s, v) = svd_trunc(b, 0.0);
        let mut q = CMat::zeros(b.nrows(), b.ncols());
        for (i, &si) in s.iter().enumerate() {
            if si > cut {
                let vi = v.column(i);
                q += vi * vi.adjoint();
            }
        }
        blocks.push(q);
    }
    Ok(Op::from_blocks(blocks))
}

/// Spectral power `X^r` of a PSD Hermitian op, taken inside the corner
/// `qMq` (eigenvalues below the support cutoff map to zero). For r < 0
/// this is the q-inverse power `X^r_q` of the change-of-density machinery.
pub fn power_on_support(alg: &TracialAlgebra, x: &Op, r: f64) -> Result<Op> {
    power_on_support_eps(alg, x, r, SUPPORT_EPS_REL)
}

pub fn power_on_support_eps(alg: &TracialAlgebra, x: &Op, r: f64, eps_rel: f64) -> Result<Op> {
    alg.check_op(x)?;
    let asym = x.asymmetry();
    let scale = x.max_abs().max(1.0);
    if asym > HERMITIAN_ASYMMETRY_TOL * scale {
        return Err(Error::NotHermitian {
            asymmetry: asym,
            tol: HERMITIAN_ASYMMETRY_TOL * scale,
        });
    }
    let sym = x.symmetrized();
    // global cutoff across blocks, like the support projection
    let lmax = sym
        .blocks
        .iter()
        .map(|b| eigh(b).0.iter().cloned().fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let cut = eps_rel * lmax;
    let blocks = sym
        .blocks
        .iter()
        .map(|b| {
            let (vals, vecs) = eigh(b);
            let k = vals.len();
            let d = CMat::from_fn(k, k, |i, j| {
                if i == j && vals[i] > cut && vals[i] > 0.0 {
                    C64::new(vals[i].powf(r), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            &vecs * d * vecs.adjoint()
        })
        .collect();
    Ok(Op::from_blocks(blocks))
}

/// Column square function `X = (Σ_i x_i* x_i)^{1/2}` of a basis.
pub fn column_square_function(e: &Subspace) -> Op {
    let alg = e.algebra();
    let mut s = alg.zero();
    for x in e.basis() {
        s = s.add(&x.adjoint().mul(x));
    }
    let blocks = s
        .blocks
        .iter()
        .map(|b| {
            let (vals, vecs) = eigh(b);
            let k = vals.len();
            let d = CMat::from_fn(k, k, |i, j| {
                if i == j {
                    C64::new(vals[i].max(0.0).sqrt(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            &vecs * d * vecs.adjoint()
        })
        .collect();
    Op::from_blocks(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::trace;
    use crate::samples;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(alg: &TracialAlgebra, entries: &[f64]) -> Op {
        let mut blocks = Vec::new();
        let mut at = 0;
        for &m in alg.block_dims() {
            let mut b = CMat::zeros(m, m);
            for i in 0..m {
                b[(i, i)] = C64::new(entries[at], 0.0);
                at += 1;
            }
            blocks.push(b);
        }
        Op::from_blocks(blocks)
    }

    #[test]
    fn schatten_identity_case() {
        let alg = TracialAlgebra::new(vec![3], vec![1.0]).unwrap();
        let n = schatten_norm(&alg, &alg.identity(), 2.0).unwrap();
        assert!((n - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn schatten_forced_arithmetic() {
        let alg = TracialAlgebra::new(vec![2], vec![1.0]).unwrap();
        let a = diag(&alg, &[3.0, 4.0]);
        assert!((schatten_norm(&alg, &a, 2.0).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn schatten_one_matches_singular_value_oracle() {
        let alg = TracialAlgebra::new(vec![3, 2], vec![1.25, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = samples::random_op(&alg, &mut rng);
            let n1 = schatten_norm(&alg, &a, 1.0).unwrap();
            // oracle: weighted sum of singular values from a full decomposition
            let oracle: f64 = a
                .blocks
                .iter()
                .zip(alg.trace_weights())
                .map(|(b, &w)| w * singular_values_mat(b).iter().sum::<f64>())
                .sum();
            assert!((n1 - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn schatten_rejects_p_below_one() {
        let alg = TracialAlgebra::new(vec![2], vec![1.0]).unwrap();
        assert!(schatten_norm(&alg, &alg.identity(), 0.5).is_err());
    }

    #[test]
    fn polar_diagonal_case() {
        let alg = TracialAlgebra::new(vec![2], vec![1.0]).unwrap();
        let a = diag(&alg, &[-2.0, 0.0]);
        let (v, absa) = polar(&alg, &a).unwrap();
        assert!(v.max_abs_diff(&diag(&alg, &[-1.0, 0.0])) < 1e-12);
        assert!(absa.max_abs_diff(&diag(&alg, &[2.0, 0.0])) < 1e-12);
    }

    #[test]
    fn polar_of_unitary() {
        let alg = TracialAlgebra::new(vec![3], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = samples::random_block_unitary(&alg, &mut rng);
        let (v, absa) = polar(&alg, &u).unwrap();
        assert!(absa.max_abs_diff(&alg.identity()) < 1e-10);
        assert!(v.max_abs_diff(&u) < 1e-10);
    }

    #[test]
    fn polar_reconstructs() {
        let alg = TracialAlgebra::new(vec![3, 2], vec![1.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let a = samples::random_op(&alg, &mut rng);
            let (v, absa) = polar(&alg, &a).unwrap();
            let recon = v.mul(&absa);
            assert!(schatten_norm(&alg, &recon.sub(&a), f64::INFINITY).unwrap() < 1e-10);
            // v*v = supp(|a|)
            let q = support(&alg, &a, SUPPORT_EPS_REL).unwrap();
            assert!(v.adjoint().mul(&v).max_abs_diff(&q) < 1e-9);
        }
    }

    #[test]
    fn support_diagonal_and_invertible() {
        let alg = TracialAlgebra::new(vec![2], vec![1.0]).unwrap();
        let a = diag(&alg, &[2.0, 0.0]);
        let q = support(&alg, &a, 1e-10).unwrap();
        assert!(q.max_abs_diff(&diag(&alg, &[1.0, 0.0])) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let u = samples::random_block_unitary(&alg, &mut rng);
        let q = support(&alg, &u, 1e-10).unwrap();
        assert!(q.max_abs_diff(&alg.identity()) < 1e-10);
    }

    #[test]
    fn support_zero_op() {
        let alg = TracialAlgebra::new(vec![2], vec![1.0]).unwrap();
        let q = support(&alg, &alg.zero(), 1e-10).unwrap();
        assert!(q.max_abs() == 0.0);
    }

    #[test]
    fn support_rank_matches_numerical_rank() {
        let alg = TracialAlgebra::new(vec![4], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for rank in 1..=3usize {
            let b = samples::random_psd(&mut rng, 4, rank);
            let a = Op::from_blocks(vec![b]);
            let q = support(&alg, &a, 1e-10).unwrap();
            let tr = trace(&alg, &q).unwrap();
            assert!((tr.re - rank as f64).abs() < 1e-9, "rank {rank}, got {}", tr.re);
        }
    }

    #[test]
    fn q_inverse_diagonal() {
        let alg = TracialAlgebra::new(vec![2], vec![1.0]).unwrap();
        let x = diag(&alg, &[2.0, 0.0]);
        let inv = power_on_support(&alg, &x, -1.0).unwrap();
        assert!(inv.max_abs_diff(&diag(&alg, &[0.5, 0.0])) < 1e-12);
        let id = power_on_support(&alg, &alg.identity(), -3.7).unwrap();
        assert!(id.max_abs_diff(&alg.identity()) < 1e-12);
    }

    #[test]
    fn q_inverse_identity_check() {
        let alg = TracialAlgebra::new(vec![3, 2], vec![1.0, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..10 {
            let x = samples::random_psd_op(&alg, &mut rng);
            let xinv = power_on_support(&alg, &x, -1.0).unwrap();
            let q = support(&alg, &x, SUPPORT_EPS_REL).unwrap();
            let lhs = x.mul(&xinv);
            let rhs = xinv.mul(&x);
            assert!(schatten_norm(&alg, &lhs.sub(&q), f64::INFINITY).unwrap() < 1e-9);
            assert!(schatten_norm(&alg, &rhs.sub(&q), f64::INFINITY).unwrap() < 1e-9);
        }
    }

    #[test]
    fn power_rejects_non_hermitian() {
        let alg = TracialAlgebra::new(vec![2], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = samples::random_op(&alg, &mut rng);
        assert!(matches!(
            power_on_support(&alg, &a, 2.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn power_additivity_on_support() {
        let alg = TracialAlgebra::new(vec![3], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for &(r, s) in &[(0.5, 1.5), (-1.0, 2.0), (2.0, -0.5)] {
            let x = Op::from_blocks(vec![samples::random_psd(&mut rng, 3, 2)]);
            let a = power_on_support(&alg, &x, r).unwrap();
            let b = power_on_support(&alg, &x, s).unwrap();
            let ab = a.mul(&b);
            let c = power_on_support(&alg, &x, r + s).unwrap();
            assert!(
                schatten_norm(&alg, &ab.sub(&c), f64::INFINITY).unwrap() < 1e-9,
                "r={r}, s={s}"
            );
        }
    }

    #[test]
    fn square_function_forced_arithmetic() {
        // basis {e_11, e_21} in M_2: Σ x*x = 2 e_11, X = √2 e_11
        let alg = TracialAlgebra::new(vec![2], vec![1.0]).unwrap();
        let mut e11 = CMat::zeros(2, 2);
        e11[(0, 0)] = C64::new(1.0, 0.0);
        let mut e21 = CMat::zeros(2, 2);
        e21[(1, 0)] = C64::new(1.0, 0.0);
        let sub = Subspace::new(
            alg.clone(),
            vec![Op::from_blocks(vec![e11.clone()]), Op::from_blocks(vec![e21])],
        )
        .unwrap();
        let x = column_square_function(&sub);
        let expected = Op::from_blocks(vec![e11 * C64::new(2f64.sqrt(), 0.0)]);
        assert!(x.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn square_function_of_unitary_is_identity() {
        let alg = TracialAlgebra::new(vec![3], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let u = samples::random_block_unitary(&alg, &mut rng);
        let sub = Subspace::new(alg.clone(), vec![u]).unwrap();
        let x = column_square_function(&sub);
        assert!(x.max_abs_diff(&alg.identity()) < 1e-10);
    }

    #[test]
    fn square_function_reconstruction_and_support() {
        let alg = TracialAlgebra::new(vec![3, 2], vec![1.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let sub = samples::random_subspace(&alg, 3, &mut rng).unwrap();
        let x = column_square_function(&sub);
        let mut s = alg.zero();
        for b in sub.basis() {
            s = s.add(&b.adjoint().mul(b));
        }
        assert!(schatten_norm(&alg, &x.mul(&x).sub(&s), f64::INFINITY).unwrap() < 1e-10);
        // supp X absorbs each |x_i| (Eq-level support compatibility)
        let q = support(&alg, &x, SUPPORT_EPS_REL).unwrap();
        for b in sub.basis() {
            let bq = b.mul(&q);
            assert!(bq.max_abs_diff(b) < 1e-9);
        }
    }
}
