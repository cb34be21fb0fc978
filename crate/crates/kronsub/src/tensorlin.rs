//! Dense linear-algebra primitives shared by every other module: Kronecker
//! products, numerical rank, orthonormal bases, principal angles,
//! pseudo-determinants, and subspace intersection dimensions.
//!
//! All decompositions (SVD, symmetric eigen) are delegated to nalgebra and
//! treated as black boxes; this module adds the tolerance policy on top.
//! Every function is pure; values are safe to share across threads.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense matrix of 64-bit reals. Column-major storage; `as_slice` is exactly
/// the column-stacking vec() operator used throughout the model layer.
pub type Matrix = DMatrix<f64>;

/// Relative cutoff separating numerical rank from round-off.
///
/// A singular value counts toward the rank when it exceeds
/// `relative_threshold * sigma_max`, making generic-position ranks robust to
/// overall scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTolerance {
    pub relative_threshold: f64,
}

impl RankTolerance {
    /// Invariant: 0 < relative_threshold < 1.
    pub fn new(relative_threshold: f64) -> Result<Self> {
        if !(relative_threshold > 0.0 && relative_threshold < 1.0) {
            return Err(Error::InvalidRatio {
                context: format!("rank tolerance must lie in (0, 1), got {relative_threshold}"),
            });
        }
        Ok(Self { relative_threshold })
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self { relative_threshold: 1e-10 }
    }
}

/// Principal angles between two subspaces, in radians, ascending.
/// Each angle lies in [0, pi/2]; cosines are clamped into [0, 1] before
/// arccos because SVD round-off can exceed 1 by ~1e-15.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAngleSet {
    pub angles: Vec<f64>,
}

impl PrincipalAngleSet {
    /// Cosines of the angles, descending (largest cosine first).
    pub fn cosines(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.cos()).collect()
    }
}

/// Kronecker product. Block (i, j) of the result equals P[i,j] * Q.
pub fn kron(p: &Matrix, q: &Matrix) -> Matrix {
    p.kronecker(q)
}

/// Orthonormal basis for the column span of `m`: the left singular vectors
/// whose singular values exceed the relative threshold.
pub fn orthonormal_basis(m: &Matrix, tol: &RankTolerance) -> Result<Matrix> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > tol.relative_threshold * smax)
        .count();
    if rank == 0 {
        return Err(Error::ZeroMatrix);
    }
    // nalgebra returns singular values sorted descending, so the first
    // `rank` columns of U span the range.
    Ok(u.columns(0, rank).into_owned())
}

/// Number of singular values above the relative threshold. Zero matrix: 0.
pub fn numerical_rank(m: &Matrix, tol: &RankTolerance) -> usize {
    let sv = m.clone().singular_values();
    let smax = sv.max();
    sv.iter().filter(|&&s| s > tol.relative_threshold * smax).count()
}

/// Principal angles between the column spans of two orthonormal matrices:
/// arccos of the singular values of U1^T U2, ascending, min(cols) of them.
pub fn principal_angles(u1: &Matrix, u2: &Matrix) -> Result<PrincipalAngleSet> {
    if u1.nrows() != u2.nrows() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "principal angles need equal row counts, got {} and {}",
                u1.nrows(),
                u2.nrows()
            ),
        });
    }
    check_orthonormal(u1)?;
    check_orthonormal(u2)?;
    let sv = (u1.transpose() * u2).singular_values();
    // Descending singular values map to ascending angles.
    let angles = sv.iter().map(|&c| c.clamp(0.0, 1.0).acos()).collect();
    Ok(PrincipalAngleSet { angles })
}

/// Product of the eigenvalues of a symmetric PSD matrix that exceed the
/// relative threshold. Empty product (zero matrix) is 1.
pub fn pseudo_determinant(m: &Matrix, tol: &RankTolerance) -> Result<f64> {
    check_symmetric(m)?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let lmax = eig.iter().cloned().fold(0.0_f64, f64::max);
    Ok(eig
        .iter()
        .filter(|&&l| l > tol.relative_threshold * lmax)
        .product())
}

/// Dimension of the intersection of the column spans, via the rank identity
/// dim(span U1 cap span U2) = rank(U1) + rank(U2) - rank([U1 U2]).
pub fn intersection_dimension(u1: &Matrix, u2: &Matrix, tol: &RankTolerance) -> Result<usize> {
    if u1.nrows() != u2.nrows() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "intersection needs equal row counts, got {} and {}",
                u1.nrows(),
                u2.nrows()
            ),
        });
    }
    let r1 = numerical_rank(u1, tol);
    let r2 = numerical_rank(u2, tol);
    let mut stacked = Matrix::zeros(u1.nrows(), u1.ncols() + u2.ncols());
    stacked.columns_mut(0, u1.ncols()).copy_from(u1);
    stacked.columns_mut(u1.ncols(), u2.ncols()).copy_from(u2);
    let rs = numerical_rank(&stacked, tol);
    Ok(r1 + r2 - rs)
}

fn check_orthonormal(u: &Matrix) -> Result<()> {
    let gram = u.transpose() * u;
    let dev = (&gram - Matrix::identity(u.ncols(), u.ncols())).abs().max();
    if dev > 1e-8 {
        return Err(Error::NotOrthonormal { max_dev: dev });
    }
    Ok(())
}

fn check_symmetric(m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSymmetric { max_dev: f64::INFINITY });
    }
    let dev = (m - m.transpose()).abs().max();
    if dev > 1e-8 {
        return Err(Error::NotSymmetric { max_dev: dev });
    }
    Ok(())
}
