//! Coordinatized normed spaces and linear maps between them.
//!
//! A [`SpaceDesc`] names a space together with the norm its coefficient
//! families carry at every amplification level: the full algebra `L_p(M)`,
//! a spanned subspace `E ⊆ L_p(M)` with its S_p structure, or one of the
//! abstract row/column spaces `C_p^n`, `R_p^n`, `R_p^n ∩ C_p^n`,
//! `R_p^n + C_p^n`. A [`LinearMapMatrix`] is a map in coordinates; amplified
//! it acts entrywise on coefficient families.

use rand::Rng;

use crate::algebra::{C64, CMat, Op, TracialAlgebra};
use crate::error::Result;
use crate::opspace::{
    column_grad, column_norm, intersection_norm, row_grad, row_norm, sum_norm_seeded,
};
use crate::samples;
use crate::spectral::svd_trunc;

#[derive(Debug, Clone)]
pub enum SpaceDesc {
    /// All of `L_p(M)` in orthonormal vectorization coordinates.
    Algebra { alg: TracialAlgebra, p: f64 },
    /// `span(basis) ⊆ L_p(M)` in basis coordinates.
    Span {
        alg: TracialAlgebra,
        basis: Vec<Op>,
        p: f64,
    },
    /// Column space `C_p^n`.
    Column { n: usize, p: f64 },
    /// Row space `R_p^n`.
    Row { n: usize, p: f64 },
    /// `R_p^n ∩ C_p^n` (max norm).
    Intersection { n: usize, p: f64 },
    /// `R_p^n + C_p^n` (infimal decomposition norm).
    Sum { n: usize, p: f64 },
}

impl SpaceDesc {
    pub fn coord_dim(&self) -> usize {
        match self {
            SpaceDesc::Algebra { alg, .. } => alg.dim(),
            SpaceDesc::Span { basis, .. } => basis.len(),
            SpaceDesc::Column { n, .. }
            | SpaceDesc::Row { n, .. }
            | SpaceDesc::Intersection { n, .. }
            | SpaceDesc::Sum { n, .. } => *n,
        }
    }

    pub fn exponent(&self) -> f64 {
        match self {
            SpaceDesc::Algebra { p, .. }
            | SpaceDesc::Span { p, .. }
            | SpaceDesc::Column { p, .. }
            | SpaceDesc::Row { p, .. }
            | SpaceDesc::Intersection { p, .. }
            | SpaceDesc::Sum { p, .. } => *p,
        }
    }

    pub fn with_exponent(&self, p: f64) -> SpaceDesc {
        let mut s = self.clone();
        match &mut s {
            SpaceDesc::Algebra { p: q, .. }
            | SpaceDesc::Span { p: q, .. }
            | SpaceDesc::Column { p: q, .. }
            | SpaceDesc::Row { p: q, .. }
            | SpaceDesc::Intersection { p: q, .. }
            | SpaceDesc::Sum { p: q, .. } => *q = p,
        }
        s
    }

    pub fn label(&self) -> String {
        match self {
            SpaceDesc::Algebra { alg, p } => format!("L_{p}(M{:?})", alg.block_dims()),
            SpaceDesc::Span { basis, p, .. } => format!("E_{}(p={p})", basis.len()),
            SpaceDesc::Column { n, p } => format!("C_{p}^{n}"),
            SpaceDesc::Row { n, p } => format!("R_{p}^{n}"),
            SpaceDesc::Intersection { n, p } => format!("R∩C({p},{n})"),
            SpaceDesc::Sum { n, p } => format!("R+C({p},{n})"),
        }
    }

    /// True iff the norm is an infimal decomposition (needs a solver).
    pub fn is_sum(&self) -> bool {
        matches!(self, SpaceDesc::Sum { .. })
    }

    /// Realizes a family over the amplified algebra (algebra-backed spaces).
    fn realize(&self, fam: &[CMat]) -> Option<(TracialAlgebra, Op)> {
        match self {
            SpaceDesc::Algebra { alg, .. } => Some(realize_algebra_family(alg, fam)),
            SpaceDesc::Span { alg, basis, .. } => {
                Some(crate::algebra::realize_amplified(alg, fam, basis))
            }
            _ => None,
        }
    }

    /// Norm of a coefficient family. For the sum space this runs the full
    /// solver at the given tolerance.
    pub fn norm(&self, fam: &[CMat], solver_tol: f64) -> Result<f64> {
        match self {
            SpaceDesc::Algebra { p, .. } | SpaceDesc::Span { p, .. } => {
                let (amp, m) = self.realize(fam).unwrap();
                crate::spectral::schatten_norm(&amp, &m, *p)
            }
            SpaceDesc::Column { p, .. } => Ok(column_norm(fam, *p)),
            SpaceDesc::Row { p, .. } => Ok(row_norm(fam, *p)),
            SpaceDesc::Intersection { p, .. } => Ok(intersection_norm(fam, *p)),
            SpaceDesc::Sum { p, .. } => Ok(sum_norm_seeded(fam, *p, solver_tol, &[])?.0),
        }
    }

    /// Norm value and ascent gradient. For the sum space this is the cheap
    /// `min(row, col)` surrogate (an upper bound; the exact value is
    /// recomputed at reported witnesses).
    pub fn ascent_value_grad(&self, fam: &[CMat]) -> (f64, Vec<CMat>) {
        match self {
            SpaceDesc::Algebra { .. } | SpaceDesc::Span { .. } => {
                let (amp, m) = self.realize(fam).unwrap();
                let p = self.exponent();
                let (value, per_block) = schatten_value_blockgrad(&amp, &m, p);
                let grad = self.pullback_blockgrad(fam, &per_block);
                (value, grad)
            }
            SpaceDesc::Column { p, .. } => (column_norm(fam, *p), column_grad(fam, *p)),
            SpaceDesc::Row { p, .. } => (row_norm(fam, *p), row_grad(fam, *p)),
            SpaceDesc::Intersection { p, .. } => {
                let r = row_norm(fam, *p);
                let c = column_norm(fam, *p);
                if r >= c {
                    (r, row_grad(fam, *p))
                } else {
                    (c, column_grad(fam, *p))
                }
            }
            SpaceDesc::Sum { p, .. } => {
                let r = row_norm(fam, *p);
                let c = column_norm(fam, *p);
                if r <= c {
                    (r, row_grad(fam, *p))
                } else {
                    (c, column_grad(fam, *p))
                }
            }
        }
    }

    fn pullback_blockgrad(&self, fam: &[CMat], per_block: &[CMat]) -> Vec<CMat> {
        let k = fam[0].nrows();
        match self {
            SpaceDesc::Algebra { alg, .. } => {
                let mut out = vec![CMat::zeros(k, k); alg.dim()];
                let mut idx = 0;
                for (c, &m) in alg.block_dims().iter().enumerate() {
                    let w = alg.trace_weights()[c].sqrt();
                    let g = &per_block[c];
                    for r in 0..m {
                        for s in 0..m {
                            let gi = &mut out[idx];
                            for u in 0..k {
                                for v in 0..k {
                                    gi[(u, v)] += g[(u * m + r, v * m + s)] / C64::new(w, 0.0);
                                }
                            }
                            idx += 1;
                        }
                    }
                }
                out
            }
            SpaceDesc::Span { alg, basis, .. } => {
                let mut out = vec![CMat::zeros(k, k); basis.len()];
                for (i, x) in basis.iter().enumerate() {
                    let gi = &mut out[i];
                    for (c, &m) in alg.block_dims().iter().enumerate() {
                        let g = &per_block[c];
                        let xb = &x.blocks[c];
                        for r in 0..m {
                            for s in 0..m {
                                let xc = xb[(r, s)].conj();
                                if xc.norm_sqr() == 0.0 {
                                    continue;
                                }
                                for u in 0..k {
                                    for v in 0..k {
                                        gi[(u, v)] += g[(u * m + r, v * m + s)] * xc;
                                    }
                                }
                            }
                        }
                    }
                }
                out
            }
            _ => unreachable!("pullback only applies to algebra-backed spaces"),
        }
    }

    /// Deterministic witness library for lower-bound searches.
    pub fn canonical_families(&self, level: usize) -> Vec<Vec<CMat>> {
        let n = self.coord_dim();
        let k = level;
        let unit = |i: usize, j: usize| -> CMat {
            let mut e = CMat::zeros(k, k);
            e[(i, j)] = C64::new(1.0, 0.0);
            e
        };
        let mut fams = Vec::new();
        // diagonal matrix units α_i = e_{i,i (mod k)}
        fams.push((0..n).map(|i| unit(i % k, i % k)).collect());
        // column units α_i = e_{i,1-style}
        fams.push((0..n).map(|i| unit(i % k, 0)).collect());
        // row units α_i = e_{1,i-style}
        fams.push((0..n).map(|i| unit(0, i % k)).collect());
        // single-coordinate identities
        for j in 0..n.min(4) {
            let mut f = vec![CMat::zeros(k, k); n];
            f[j] = CMat::identity(k, k);
            fams.push(f);
        }
        fams
    }

    pub fn random_family<R: Rng>(&self, rng: &mut R, level: usize) -> Vec<CMat> {
        (0..self.coord_dim())
            .map(|_| samples::random_matrix(rng, level, level))
            .collect()
    }
}

/// Realizes `Σ_j α_j ⊗ b_j` for the orthonormal vectorization basis of the
/// algebra (entry `(c,r,s)` scaled by `1/√λ_c`), without materializing the
/// basis ops.
pub fn realize_algebra_family(alg: &TracialAlgebra, fam: &[CMat]) -> (TracialAlgebra, Op) {
    let k = if fam.is_empty() { 1 } else { fam[0].nrows() };
    let amp = alg.amplified(k);
    let mut blocks = Vec::with_capacity(alg.num_blocks());
    let mut idx = 0;
    for (c, &m) in alg.block_dims().iter().enumerate() {
        let w = alg.trace_weights()[c].sqrt();
        let mut big = CMat::zeros(k * m, k * m);
        for r in 0..m {
            for s in 0..m {
                let a = &fam[idx];
                for u in 0..k {
                    for v in 0..k {
                        let z = a[(u, v)];
                        if z.norm_sqr() != 0.0 {
                            big[(u * m + r, v * m + s)] += z / C64::new(w, 0.0);
                        }
                    }
                }
                idx += 1;
            }
        }
        blocks.push(big);
    }
    (amp, Op::from_blocks(blocks))
}

/// Weighted Schatten-p value together with the per-block Wirtinger gradient
/// matrices `G_c` (so `df = 2 Re Σ_c Tr(G_c† dM_c)`).
pub fn schatten_value_blockgrad(amp: &TracialAlgebra, m: &Op, p: f64) -> (f64, Vec<CMat>) {
    let mut triples = Vec::with_capacity(m.blocks.len());
    for b in &m.blocks {
        triples.push(svd_trunc(b, 1e-13));
    }
    if p.is_infinite() {
        let mut best = (0usize, 0.0f64);
        for (c, (_, s, _)) in triples.iter().enumerate() {
            if let Some(&s0) = s.first() {
                if s0 > best.1 {
                    best = (c, s0);
                }
            }
        }
        let value = best.1;
        let grads = triples
            .iter()
            .enumerate()
            .map(|(c, (u, s, v))| {
                if c == best.0 && !s.is_empty() {
                    let u0 = u.column(0);
                    let v0 = v.column(0);
                    u0 * v0.adjoint() * C64::new(0.5, 0.0)
                } else {
                    CMat::zeros(m.blocks[c].nrows(), m.blocks[c].ncols())
                }
            })
            .collect();
        return (value, grads);
    }
    let mut total = 0.0;
    for ((_, s, _), &w) in triples.iter().zip(amp.trace_weights()) {
        total += w * s.iter().map(|x| x.powf(p)).sum::<f64>();
    }
    let value = total.powf(1.0 / p);
    if value == 0.0 {
        return (
            0.0,
            m.blocks.iter().map(|b| CMat::zeros(b.nrows(), b.ncols())).collect(),
        );
    }
    let grads = triples
        .iter()
        .zip(amp.trace_weights())
        .map(|((u, s, v), &w)| {
            if s.is_empty() {
                return CMat::zeros(u.nrows().max(1), v.nrows().max(1));
            }
            let d = CMat::from_fn(s.len(), s.len(), |i, j| {
                if i == j {
                    C64::new(0.5 * w * s[i].powf(p - 1.0) * value.powf(1.0 - p), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            u * d * v.adjoint()
        })
        .collect();
    (value, grads)
}

/// A linear map between coordinatized spaces, stored as its coordinate
/// matrix (`codomain.coord_dim() × domain.coord_dim()`).
#[derive(Debug, Clone)]
pub struct LinearMapMatrix {
    pub domain: SpaceDesc,
    pub codomain: SpaceDesc,
    pub matrix: CMat,
}

impl LinearMapMatrix {
    pub fn new(domain: SpaceDesc, codomain: SpaceDesc, matrix: CMat) -> Self {
        assert_eq!(matrix.ncols(), domain.coord_dim(), "domain dimension");
        assert_eq!(matrix.nrows(), codomain.coord_dim(), "codomain dimension");
        Self {
            domain,
            codomain,
            matrix,
        }
    }

    /// Amplified action on a coefficient family: `(Tα)_i = Σ_j T_ij α_j`.
    pub fn apply_family(&self, fam: &[CMat]) -> Vec<CMat> {
        let (rows, cols) = self.matrix.shape();
        assert_eq!(fam.len(), cols);
        let k = fam[0].nrows();
        (0..rows)
            .map(|i| {
                let mut out = CMat::zeros(k, k);
                for (j, a) in fam.iter().enumerate() {
                    let t = self.matrix[(i, j)];
                    if t.norm_sqr() != 0.0 {
                        out += a * t;
                    }
                }
                out
            })
            .collect()
    }

    /// Pullback of codomain gradients: apply the adjoint matrix entrywise.
    pub fn adjoint_apply_family(&self, fam: &[CMat]) -> Vec<CMat> {
        let (rows, cols) = self.matrix.shape();
        assert_eq!(fam.len(), rows);
        let k = fam[0].nrows();
        (0..cols)
            .map(|j| {
                let mut out = CMat::zeros(k, k);
                for (i, a) in fam.iter().enumerate() {
                    let t = self.matrix[(i, j)].conj();
                    if t.norm_sqr() != 0.0 {
                        out += a * t;
                    }
                }
                out
            })
            .collect()
    }

    /// `other ∘ self` (apply self first).
    pub fn then(&self, other: &LinearMapMatrix) -> LinearMapMatrix {
        LinearMapMatrix::new(
            self.domain.clone(),
            other.codomain.clone(),
            &other.matrix * &self.matrix,
        )
    }
}
