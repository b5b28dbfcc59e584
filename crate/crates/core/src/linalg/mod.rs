//! Small dense Hermitian matrix kernel.
//!
//! Eigenproblems are solved with cyclic Jacobi on the realification
//! `L(X) = [[Re X, -Im X], [Im X, Re X]]`, whose spectrum is that of `X` with
//! every eigenvalue doubled in multiplicity. One complex eigenvector is
//! recovered per eigenvalue pair.

mod dense;
mod eigen;
mod hermitian;
mod jacobi;

pub use dense::{realify_general, DenseMatrix};
pub use eigen::{eigen, psd_project, psd_status, rank_of, EigenDecomposition, PsdStatus, Ranked};
pub use hermitian::{realify, w_to_x, HermitianMatrix, RealSymmetric};
pub use jacobi::{singular_values, symmetric_eigen, SymmetricEigen, JACOBI_MAX_SWEEPS};
