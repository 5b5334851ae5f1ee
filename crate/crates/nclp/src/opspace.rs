//! Amplified (matrix-coefficient) operator-space norms.
//!
//! A coefficient family `(α_1..α_n)` of k×k matrices represents the element
//! `Σ_i α_i ⊗ δ_i` of the level-k amplification of an n-dimensional
//! coordinatized space. Column and row norms are the S_p-amplified norms of
//! the column and row Hilbert spaces `C_p^n`, `R_p^n`; intersection is their
//! max; the sum norm is the infimal-decomposition norm of `R + C`, computed
//! by convex first-order minimization (the value is an upper bound on the
//! true infimum, within the solver tolerance wherever a scalar oracle
//! exists).

use nalgebra::DVector;

use crate::algebra::{realize_amplified, C64, CMat, Op, TracialAlgebra};
use crate::error::{Error, Result};
use crate::spectral::{eigh, psd_power_mat, schatten_norm};

/// Iteration cap of the sum-norm solver.
pub const SUM_NORM_ITER_CAP: usize = 5000;
/// Default number of restarts of the sum-norm solver.
pub const SUM_NORM_RESTARTS: usize = 8;

/// A decomposition `α_i = b_i + c_i` achieving (approximately) the sum norm
/// `row(b) + col(c)`.
#[derive(Debug, Clone)]
pub struct DecompositionWitness {
    pub b_parts: Vec<CMat>,
    pub c_parts: Vec<CMat>,
    pub value: f64,
}

fn psd_eigenvalues(s: &CMat) -> DVector<f64> {
    eigh(s).0.map(|l| l.max(0.0))
}

fn schatten_of_psd_sqrt(s: &CMat, p: f64) -> f64 {
    let vals = psd_eigenvalues(s);
    if p.is_infinite() {
        return vals.iter().cloned().fold(0.0, f64::max).sqrt();
    }
    vals.iter().map(|l| l.powf(p / 2.0)).sum::<f64>().powf(1.0 / p)
}

/// `‖(Σ_i α_i* α_i)^{1/2}‖_{S_p^k}` — the amplified norm of `Σ δ_i ⊗ α_i`
/// in `C_p^n`.
pub fn column_norm(coeffs: &[CMat], p: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let k = coeffs[0].nrows();
    let mut s = CMat::zeros(k, k);
    for a in coeffs {
        s += a.adjoint() * a;
    }
    schatten_of_psd_sqrt(&s, p)
}

/// `‖(Σ_i α_i α_i*)^{1/2}‖_{S_p^k}` — the amplified norm in `R_p^n`.
pub fn row_norm(coeffs: &[CMat], p: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let k = coeffs[0].nrows();
    let mut s = CMat::zeros(k, k);
    for a in coeffs {
        s += a * a.adjoint();
    }
    schatten_of_psd_sqrt(&s, p)
}

/// `max(row, column)` — the `R_p^n ∩ C_p^n` amplified norm.
pub fn intersection_norm(coeffs: &[CMat], p: f64) -> f64 {
    row_norm(coeffs, p).max(column_norm(coeffs, p))
}

/// Wirtinger ascent gradient of `column_norm` at the family.
pub(crate) fn column_grad(coeffs: &[CMat], p: f64) -> Vec<CMat> {
    let k = coeffs[0].nrows();
    let mut s = CMat::zeros(k, k);
    for a in coeffs {
        s += a.adjoint() * a;
    }
    let f = schatten_of_psd_sqrt(&s, p);
    if f == 0.0 {
        return coeffs.iter().map(|a| CMat::zeros(a.nrows(), a.ncols())).collect();
    }
    if p.is_infinite() {
        let (vals, vecs) = eigh(&s);
        let v = vecs.column(0).clone_owned();
        let proj = &v * v.adjoint();
        let scale = C64::new(0.5 / vals[0].max(0.0).sqrt(), 0.0);
        return coeffs.iter().map(|a| a * &proj * scale).collect();
    }
    let power = psd_power_mat(&s, p / 2.0 - 1.0, 1e-13);
    let scale = C64::new(0.5 * f.powf(1.0 - p), 0.0);
    coeffs.iter().map(|a| a * &power * scale).collect()
}

/// Wirtinger ascent gradient of `row_norm` at the family.
pub(crate) fn row_grad(coeffs: &[CMat], p: f64) -> Vec<CMat> {
    let k = coeffs[0].nrows();
    let mut s = CMat::zeros(k, k);
    for a in coeffs {
        s += a * a.adjoint();
    }
    let f = schatten_of_psd_sqrt(&s, p);
    if f == 0.0 {
        return coeffs.iter().map(|a| CMat::zeros(a.nrows(), a.ncols())).collect();
    }
    if p.is_infinite() {
        let (vals, vecs) = eigh(&s);
        let v = vecs.column(0).clone_owned();
        let proj = &v * v.adjoint();
        let scale = C64::new(0.5 / vals[0].max(0.0).sqrt(), 0.0);
        return coeffs.iter().map(|a| &proj * a * scale).collect();
    }
    let power = psd_power_mat(&s, p / 2.0 - 1.0, 1e-13);
    let scale = C64::new(0.5 * f.powf(1.0 - p), 0.0);
    coeffs.iter().map(|a| &power * a * scale).collect()
}

fn family_axpy(y: &mut [CMat], a: f64, x: &[CMat]) {
    let c = C64::new(a, 0.0);
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * c;
    }
}

fn family_sub(a: &[CMat], b: &[CMat]) -> Vec<CMat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn family_norm_sq(a: &[CMat]) -> f64 {
    a.iter().map(|m| m.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()
}

fn sum_objective(alpha: &[CMat], b: &[CMat], p: f64) -> f64 {
    let c = family_sub(alpha, b);
    row_norm(b, p) + column_norm(&c, p)
}

/// `inf { row(b) + col(c) : b + c = α }` — the `R_p^n + C_p^n` norm —
/// approximated by projected gradient descent over the b-part with random
/// restarts. Returns the value and the achieving decomposition.
pub fn sum_norm(coeffs: &[CMat], p: f64, solver_tol: f64) -> Result<(f64, DecompositionWitness)> {
    sum_norm_seeded(coeffs, p, solver_tol, &[])
}

/// Like [`sum_norm`] but with extra warm-start b-parts tried first.
pub fn sum_norm_seeded(
    coeffs: &[CMat],
    p: f64,
    solver_tol: f64,
    warm_starts: &[Vec<CMat>],
) -> Result<(f64, DecompositionWitness)> {
    if coeffs.is_empty() || coeffs.iter().all(|a| a.iter().all(|z| z.norm_sqr() == 0.0)) {
        return Ok((
            0.0,
            DecompositionWitness {
                b_parts: coeffs.to_vec(),
                c_parts: coeffs.to_vec(),
                value: 0.0,
            },
        ));
    }
    let zero: Vec<CMat> = coeffs.iter().map(|a| CMat::zeros(a.nrows(), a.ncols())).collect();
    let half: Vec<CMat> = coeffs.iter().map(|a| a * C64::new(0.5, 0.0)).collect();
    let mut starts: Vec<Vec<CMat>> = vec![zero, coeffs.to_vec(), half];
    starts.extend_from_slice(warm_starts);
    // deterministic pseudo-random perturbed starts
    let scale = family_norm_sq(coeffs).sqrt();
    for r in 0..SUM_NORM_RESTARTS.saturating_sub(starts.len()) {
        let t = (r as f64 + 1.0) / (SUM_NORM_RESTARTS as f64 + 1.0);
        let b: Vec<CMat> = coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let phase = C64::new((t * (i as f64 + 1.0)).cos(), (t * (i as f64 + 2.0)).sin())
                    * C64::new(0.1 * scale / (1.0 + family_norm_sq(coeffs).sqrt()), 0.0);
                a * C64::new(t, 0.0) + CMat::from_element(a.nrows(), a.ncols(), phase)
            })
            .collect();
        starts.push(b);
    }

    let mut best_val = f64::INFINITY;
    let mut best_b: Vec<CMat> = coeffs.to_vec();
    let mut total_iters = 0usize;
    let mut converged = false;
    for start in &starts {
        let mut b = start.clone();
        let mut val = sum_objective(coeffs, &b, p);
        let mut step = 0.25;
        let mut stalled = 0;
        while total_iters < SUM_NORM_ITER_CAP {
            total_iters += 1;
            let c = family_sub(coeffs, &b);
            // descent direction: −(∂row(b) − ∂col(c))
            let gb = row_grad(&b, p);
            let gc = column_grad(&c, p);
            let mut dir: Vec<CMat> = gb.iter().zip(&gc).map(|(x, y)| y - x).collect();
            let gn = family_norm_sq(&dir).sqrt();
            if gn < 1e-14 {
                converged = true;
                break;
            }
            for d in &mut dir {
                *d /= C64::new(gn, 0.0);
            }
            let mut trial = b.clone();
            family_axpy(&mut trial, step * scale.max(1e-30), &dir);
            let tval = sum_objective(coeffs, &trial, p);
            if tval < val - 1e-16 {
                let drop = val - tval;
                b = trial;
                val = tval;
                step = (step * 1.3).min(0.5);
                if drop < solver_tol.max(1e-14) * val.max(1e-30) {
                    stalled += 1;
                    if stalled > 12 {
                        converged = true;
                        break;
                    }
                } else {
                    stalled = 0;
                }
            } else {
                step *= 0.5;
                if step < 1e-12 {
                    converged = true;
                    break;
                }
            }
        }
        if val < best_val {
            best_val = val;
            best_b = b;
        }
    }
    let witness = DecompositionWitness {
        c_parts: family_sub(coeffs, &best_b),
        b_parts: best_b,
        value: best_val,
    };
    if !converged && total_iters >= SUM_NORM_ITER_CAP && best_val.is_infinite() {
        return Err(Error::SumNormStalled {
            value: best_val,
            witness: Box::new(witness),
        });
    }
    Ok((best_val, witness))
}

/// Both sides of the opposite-transpose identity for a square array of
/// algebra elements: the S_p norm of the blockwise-transposed array equals
/// the S_p norm of the index-transposed array.
pub fn opposite_transpose_check(
    alg: &TracialAlgebra,
    array: &[Vec<Op>],
    p: f64,
) -> Result<(f64, f64)> {
    let r = array.len();
    for row in array {
        if row.len() != r {
            return Err(Error::ShapeMismatch("coefficient array must be square".into()));
        }
    }
    let mut units = Vec::with_capacity(r * r);
    let mut lhs_ops = Vec::with_capacity(r * r);
    let mut rhs_ops = Vec::with_capacity(r * r);
    for i in 0..r {
        for j in 0..r {
            let mut e = CMat::zeros(r, r);
            e[(i, j)] = C64::new(1.0, 0.0);
            units.push(e);
            lhs_ops.push(array[i][j].transpose_blocks());
            rhs_ops.push(array[j][i].clone());
        }
    }
    let (amp, lhs_mat) = realize_amplified(alg, &units, &lhs_ops);
    let (_, rhs_mat) = realize_amplified(alg, &units, &rhs_ops);
    let lhs = schatten_norm(&amp, &lhs_mat, p)?;
    let rhs = schatten_norm(&amp, &rhs_mat, p)?;
    Ok((lhs, rhs))
}

/// Minimum eigenvalue of `2 (Σα_i*α_i) ⊗ (Σx_i*x_i) − |Σα_i ⊗ x_i|²`;
/// nonnegative up to roundoff by the tensor Cauchy-Schwarz inequality.
pub fn tensor_cauchy_min_eig(alg: &TracialAlgebra, coeffs: &[CMat], xs: &[Op]) -> Result<f64> {
    assert_eq!(coeffs.len(), xs.len());
    let k = coeffs[0].nrows();
    let mut sa = CMat::zeros(k, k);
    for a in coeffs {
        sa += a.adjoint() * a;
    }
    let mut sx = alg.zero();
    for x in xs {
        sx = sx.add(&x.adjoint().mul(x));
    }
    let (amp, t) = realize_amplified(alg, coeffs, xs);
    let t2 = t.adjoint().mul(&t);
    let mut min_eig = f64::INFINITY;
    for (c, xb) in sx.blocks.iter().enumerate() {
        let m = xb.nrows();
        let mut kron = CMat::zeros(k * m, k * m);
        for u in 0..k {
            for v in 0..k {
                let a = sa[(u, v)] * C64::new(2.0, 0.0);
                for rr in 0..m {
                    for ss in 0..m {
                        kron[(u * m + rr, v * m + ss)] = a * xb[(rr, ss)];
                    }
                }
            }
        }
        let diff = kron - &t2.blocks[c];
        let (vals, _) = eigh(&diff);
        let lmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        min_eig = min_eig.min(lmin);
    }
    let _ = amp;
    Ok(min_eig)
}
