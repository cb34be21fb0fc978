//! Kronecker-structured subspace models.
//!
//! A signal class is a pair of factor matrices `(A, B)`; class members are
//! matrices `Y = A X B^T + Z` with Gaussian coefficients `X` and noise `Z`.
//! Vectorized, each class spans the column space of the Kronecker product
//! `B ⊗ A`, so an ensemble of classes is a set of structured subspaces of
//! `R^{m1 m2}`.
//!
//! The crate provides:
//!
//! - [`tensorlin`]: dense linear-algebra primitives (Kronecker products,
//!   numerical rank, orthonormal bases, principal angles, pseudo-determinant,
//!   subspace intersection dimension),
//! - [`model`]: the generative model, its dictionary prior, and the
//!   eigen-factored class covariance,
//! - [`geometry`]: closed-form pair ranks, diversity orders, and
//!   Kronecker-factored principal angles,
//! - [`bounds`]: analytic misclassification bounds (Bhattacharyya, eigenvalue
//!   form, high-SNR principal-angle form, union bound) and capacity bounds,
//! - [`classifier`]: maximum-likelihood classification and a reproducible
//!   Monte Carlo error-rate harness,
//! - [`ksld2`]: the K-SLD2 discriminative dictionary learner and its
//!   reconstruction-error classification rule,
//! - [`dataio`]: labeled datasets and the `kst` text interchange format.

pub mod bounds;
pub mod classifier;
pub mod dataio;
pub mod error;
pub mod geometry;
pub mod ksld2;
pub mod model;
pub mod tensorlin;

pub use error::{Error, Result};
