//! Reference oracles for every task: symmetric eigen-decomposition (cyclic
//! Jacobi), singular values and SVD, Gauss-Jordan inversion, determinants and
//! condition numbers. Elementwise and product operations live on
//! [`Matrix`](crate::Matrix) itself.

mod eigen;
mod inverse;
mod svd;

pub use eigen::{
    sym_eigen, sym_eigenvalues, EigenResult, MAX_JACOBI_SWEEPS, OFFDIAG_TOL, SYMMETRY_TOL,
};
pub use inverse::{
    condition_number, determinant, invert, orthogonality_error, SINGULAR_PIVOT_TOL,
};
pub use svd::{singular_values, svd, SvdResult, MAX_SVD_SWEEPS};
