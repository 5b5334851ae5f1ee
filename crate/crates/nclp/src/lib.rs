//! Numerical noncommutative L_p at desk scale.
//!
//! Finite-dimensional subspaces of `L_p(M)` for weighted-trace block-matrix
//! algebras `M`: Lewis bases and their densities, change-of-density
//! factorizations through `C_p^n`, projections, amplified operator-space
//! norms (row/column/intersection/sum), and measured distance and
//! projection-constant certificates against the explicit row-column rates.

pub mod algebra;
pub mod error;
pub mod opspace;
pub mod samples;
pub mod spectral;

pub use algebra::{inner, realize_amplified, trace, C64, CMat, CVec, Op, Subspace, TracialAlgebra};
pub use error::{Error, Result};
pub use opspace::{
    column_norm, intersection_norm, opposite_transpose_check, row_norm, sum_norm,
    tensor_cauchy_min_eig, DecompositionWitness,
};
pub use spectral::{
    column_square_function, eigh, polar, power_on_support, schatten_norm, schatten_norm_mat,
    support,
};
