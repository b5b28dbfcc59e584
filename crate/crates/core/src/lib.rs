//! Certified lower bounds for AC optimal power flow by linear cutting planes.
//!
//! The relaxation keeps only linear constraints: per-bus squared voltage
//! magnitudes, per-pair products `c + js`, branch flows, generator outputs and
//! cost epigraphs. Positive semidefiniteness of small clique submatrices of the
//! implicit voltage outer product is enforced lazily through eigenvector and
//! projection cuts, alongside Jabr, thermal-limit and cost tangent cuts.
//!
//! Modules:
//! - [`case_io`]: MATPOWER parsing, per-unit normalization, load perturbation.
//! - [`network`]: branch admittances, the bus-pair graph, 3-cycles and chordal cliques.
//! - [`linalg`]: small dense Hermitian kernel (realification, Jacobi eigen, PSD tools).
//! - [`relaxation`]: the base linear model and clique matrix assembly.
//! - [`separation`]: cut generators.
//! - [`cut_pool`]: admission, aging, dropping and warm-start files.
//! - [`lp`]: LP backend abstraction with Clarabel and simplex adapters.
//! - [`driver`]: the round loop and reporting.
//! - [`theory`]: randomized verification harness for the matrix identities.

pub mod case_io;
pub mod cut_pool;
pub mod driver;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod network;
pub mod relaxation;
pub mod scalar;
pub mod separation;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Hermitian matrix over `f64`.
pub type HermitianMatrix = linalg::HermitianMatrix<f64>;
/// Real symmetric matrix over `f64`.
pub type RealSymmetric = linalg::RealSymmetric<f64>;
/// Hermitian eigendecomposition over `f64`.
pub type EigenDecomposition = linalg::EigenDecomposition<f64>;
/// Complex scalar over `f64`.
pub type Complex = num_complex::Complex<f64>;

/// Single-precision variants of the matrix kernel.
pub mod f32 {
    pub type HermitianMatrix = crate::linalg::HermitianMatrix<f32>;
    pub type RealSymmetric = crate::linalg::RealSymmetric<f32>;
    pub type EigenDecomposition = crate::linalg::EigenDecomposition<f32>;
}
