//! Closed-form subspace geometry: the generic rank of a stacked pair of
//! Kronecker dictionaries, diversity orders for Kronecker-structured and
//! unstructured subspaces, the diversity-gap regions, and the product
//! identity for Kronecker principal angles.

use crate::error::{Error, Result};
use crate::model::{gaussian_matrix, Dims, KSClass, RngStream};
use crate::tensorlin::{
    numerical_rank, orthonormal_basis, principal_angles, Matrix, PrincipalAngleSet, RankTolerance,
};
use serde::Serialize;

/// Case label for the diversity gap. The split follows how each factor's
/// measurement count compares with twice its subspace dimension; `Boundary`
/// covers the exact-equality edges the strict case analysis leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// Both factors oversampled: m1 > 2n1, m2 > 2n2. No gap.
    R1,
    /// Only the row factor oversampled: m1 > 2n1, m2 < 2n2. No gap.
    R2,
    /// Only the column factor oversampled: m1 < 2n1, m2 > 2n2. No gap.
    R3,
    /// Both undersampled, m1m2 > 2n1n2: gap = (2n1-m1)(2n2-m2).
    R4a,
    /// Both undersampled, m1m2 < 2n1n2: gap = 2(m1-n1)(m2-n2).
    R4b,
    /// m1 = 2n1, m2 = 2n2, or m1m2 = 2n1n2 exactly.
    Boundary,
}

/// Diversity orders of the structured and unstructured models and their gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiversityReport {
    pub d_ks: usize,
    pub d_std: usize,
    pub gap: usize,
    pub region: Region,
}

fn pos_part(x: i64) -> usize {
    x.max(0) as usize
}

/// Generic rank of the m1m2 x 2n1n2 stacked dictionary of a class pair:
/// 2n1n2 - [2n1-m1]^+ [2n2-m2]^+.
pub fn expected_pair_rank(dims: Dims) -> usize {
    let (m1, m2, n1, n2) = (dims.m1 as i64, dims.m2 as i64, dims.n1 as i64, dims.n2 as i64);
    (2 * n1 * n2) as usize - pos_part(2 * n1 - m1) * pos_part(2 * n2 - m2)
}

/// Numerical rank of the explicit stacked pair [D_i D_j].
pub fn ks_pair_rank_numeric(ci: &KSClass, cj: &KSClass, tol: &RankTolerance) -> Result<usize> {
    if ci.factor_dims() != cj.factor_dims() {
        return Err(Error::DimensionMismatch {
            context: "pair rank needs classes with identical factor shapes".into(),
        });
    }
    let di = ci.dictionary();
    let dj = cj.dictionary();
    let mut stacked = Matrix::zeros(di.nrows(), di.ncols() + dj.ncols());
    stacked.columns_mut(0, di.ncols()).copy_from(&di);
    stacked.columns_mut(di.ncols(), dj.ncols()).copy_from(&dj);
    Ok(numerical_rank(&stacked, tol))
}

/// Diversity order of the structured model, its unstructured counterpart,
/// the gap, and the case label. The gap values always come from the two
/// closed-form diversity expressions; the region is descriptive.
pub fn diversity_order(dims: Dims) -> DiversityReport {
    let (m1, m2, n1, n2) = (dims.m1 as i64, dims.m2 as i64, dims.n1 as i64, dims.n2 as i64);
    let d_ks = (n1 * n2) as usize - pos_part(2 * n1 - m1) * pos_part(2 * n2 - m2);
    let d_std = (n1 * n2) as usize - pos_part(2 * n1 * n2 - m1 * m2);
    let region = if m1 == 2 * n1 || m2 == 2 * n2 {
        Region::Boundary
    } else {
        match (m1 > 2 * n1, m2 > 2 * n2) {
            (true, true) => Region::R1,
            (true, false) => Region::R2,
            (false, true) => Region::R3,
            (false, false) => match (m1 * m2).cmp(&(2 * n1 * n2)) {
                std::cmp::Ordering::Greater => Region::R4a,
                std::cmp::Ordering::Less => Region::R4b,
                std::cmp::Ordering::Equal => Region::Boundary,
            },
        }
    };
    DiversityReport { d_ks, d_std, gap: d_std - d_ks, region }
}

/// Principal angles between two Kronecker-structured subspaces, computed
/// from the factor angles: the cosine multiset is the outer product of the
/// factor cosine sets. Never forms the m1m2-sized SVD (that path exists only
/// as a test oracle).
pub fn ks_principal_angles(ci: &KSClass, cj: &KSClass) -> Result<PrincipalAngleSet> {
    if ci.factor_dims() != cj.factor_dims() {
        return Err(Error::DimensionMismatch {
            context: "principal angles need classes with identical factor shapes".into(),
        });
    }
    let tol = RankTolerance::default();
    let ca = principal_angles(
        &orthonormal_basis(&ci.a, &tol)?,
        &orthonormal_basis(&cj.a, &tol)?,
    )?
    .cosines();
    let cb = principal_angles(
        &orthonormal_basis(&ci.b, &tol)?,
        &orthonormal_basis(&cj.b, &tol)?,
    )?
    .cosines();
    let mut cosines: Vec<f64> = ca
        .iter()
        .flat_map(|x| cb.iter().map(move |y| x * y))
        .collect();
    cosines.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let angles = cosines.iter().map(|c| c.clamp(0.0, 1.0).acos()).collect();
    Ok(PrincipalAngleSet { angles })
}

/// Two m x n orthonormal factors whose principal-angle cosines equal the
/// prescription exactly, embedded in a seeded random rotation. Cosine 1
/// entries share a column; each cosine below 1 consumes one extra ambient
/// direction, so n plus the count of sub-unit cosines must fit in m.
pub fn planted_angle_factors(
    m: usize,
    cosines: &[f64],
    stream: RngStream,
) -> Result<(Matrix, Matrix)> {
    let n = cosines.len();
    for &c in cosines {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidRatio {
                context: format!("planted cosine {c} outside [0, 1]"),
            });
        }
    }
    let partners = cosines.iter().filter(|&&c| c < 1.0).count();
    if n == 0 || n + partners > m {
        return Err(Error::DimensionMismatch {
            context: format!(
                "planting {n} angles ({partners} below 1) needs {} directions, have {m}",
                n + partners
            ),
        });
    }
    let mut rng = stream.rng();
    let q = gaussian_matrix(m, m, 1.0, &mut rng).qr().q();
    let first = q.columns(0, n).into_owned();
    let mut second = first.clone();
    let mut partner = n;
    for (i, &c) in cosines.iter().enumerate() {
        if c < 1.0 {
            let col = q.column(i) * c + q.column(partner) * (1.0 - c * c).sqrt();
            second.set_column(i, &col);
            partner += 1;
        }
    }
    Ok((first, second))
}
