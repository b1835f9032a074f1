//! Dense symmetric linear algebra: eigendecompositions, Cholesky, matrix functions.
//!
//! Everything is hand-rolled and generic over [`Real`](crate::Real). Generalized
//! eigenproblems go through Cholesky congruence, never an explicit inverse.

mod chebyshev;
mod cholesky;
mod eig;
mod matrix;
mod tridiag;

pub use chebyshev::{ChebyshevSeries, LinearOperator};
pub use cholesky::{cholesky, Cholesky};
pub use eig::{
    apply_matrix_function, condition_number, inv_spd, inv_sqrt_spd, sqrt_spd, sym_eig,
    sym_eig_named, EigDecomposition, MAX_SWEEPS,
};
pub use matrix::{Matrix, SymMatrix};
pub use tridiag::{JacobiMatrix, SymTridiagonal, QL_VECTOR_LIMIT};
