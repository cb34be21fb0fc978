//! Analytic misclassification and capacity bounds: the Bhattacharyya bound
//! for arbitrary Gaussian pairs, its eigen-factored specialization to
//! Kronecker-structured class pairs, the high-SNR principal-angle bound with
//! its constant, the ensemble union bound, and the classification-capacity
//! prelog bounds.
//!
//! All determinant work happens in log space on small Gram matrices; the
//! ambient m1m2 x m1m2 covariances are never formed except in test oracles.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::diversity_order;
use crate::model::{Dims, KSClass, KSEnsemble};
use crate::tensorlin::{
    kron, numerical_rank, orthonormal_basis, principal_angles, pseudo_determinant, Matrix,
    RankTolerance,
};

/// A pair of Gaussian hypotheses with explicit dense covariances.
#[derive(Debug, Clone)]
pub struct GaussianPair {
    pub mu1: DVector<f64>,
    pub mu2: DVector<f64>,
    pub s1: Matrix,
    pub s2: Matrix,
}

impl GaussianPair {
    /// Invariants: conformable shapes, covariances symmetric to 1e-8.
    pub fn new(mu1: DVector<f64>, mu2: DVector<f64>, s1: Matrix, s2: Matrix) -> Result<Self> {
        let m = mu1.len();
        if mu2.len() != m || s1.shape() != (m, m) || s2.shape() != (m, m) {
            return Err(Error::DimensionMismatch {
                context: "Gaussian pair needs means of length M and M x M covariances".into(),
            });
        }
        for s in [&s1, &s2] {
            let dev = (s - s.transpose()).abs().max();
            if dev > 1e-8 {
                return Err(Error::NotSymmetric { max_dev: dev });
            }
        }
        Ok(Self { mu1, mu2, s1, s2 })
    }
}

/// Which sign the truncation-index formulas put before the square root.
/// `MinusRoot` is the default; the indices it produces are nonpositive
/// whenever the subspaces overlap and are clamped into range. `PlusRoot`
/// yields positive thresholds that skip the overlap directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum TruncationVariant {
    #[default]
    MinusRoot,
    PlusRoot,
}

/// High-SNR angle-form bound for one class pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleBound {
    pub bound: f64,
    pub c1: f64,
    pub t1: usize,
    pub t2: usize,
}

/// Per-pair analytic bounds over an SNR grid, plus the union bound.
/// Degenerate angle-bound entries are None with a note, never NaN.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub snr_db: Vec<f64>,
    /// Unordered class pairs (i, j) with i < j, in lexicographic order.
    pub pairs: Vec<[usize; 2]>,
    /// pairwise_bound[pair][snr point].
    pub pairwise_bound: Vec<Vec<f64>>,
    pub union_bound: Vec<f64>,
    /// angle_bound[pair][snr point]; None when the pair is degenerate.
    pub angle_bound: Vec<Vec<Option<f64>>>,
    /// Why a pair's angle bound is missing, when it is.
    pub angle_note: Vec<Option<String>>,
    pub c1: Vec<Option<f64>>,
    pub t1: Vec<Option<usize>>,
    pub t2: Vec<Option<usize>>,
}

fn log_det_cholesky(s: &Matrix) -> Result<(nalgebra::Cholesky<f64, nalgebra::Dyn>, f64)> {
    let chol = s.clone().cholesky().ok_or(Error::SingularCovariance)?;
    let ld = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Ok((chol, ld))
}

/// Bhattacharyya bound (1/2) e^{-b} on the error of deciding between two
/// equiprobable Gaussians, with b the Bhattacharyya distance: an eighth of
/// the Mahalanobis term under the mean covariance plus half the log ratio
/// of the mean determinant to the geometric mean of the two determinants.
pub fn bhattacharyya_bound(pair: &GaussianPair) -> Result<f64> {
    let sbar = (&pair.s1 + &pair.s2) * 0.5;
    let (chol, ld_bar) = log_det_cholesky(&sbar)?;
    let (_, ld1) = log_det_cholesky(&pair.s1)?;
    let (_, ld2) = log_det_cholesky(&pair.s2)?;
    let d = &pair.mu1 - &pair.mu2;
    let quad = 0.125 * d.dot(&chol.solve(&d));
    let b = 0.5 * ld_bar - 0.25 * ld1 - 0.25 * ld2 + quad;
    Ok(0.5 * (-b).exp())
}

/// Gram matrix (B_i^T B_j) kron (A_i^T A_j) of a class pair's dictionaries.
fn dictionary_gram(ci: &KSClass, cj: &KSClass) -> Matrix {
    kron(&(ci.b.transpose() * &cj.b), &(ci.a.transpose() * &cj.a))
}

/// Eigenvalues of a symmetric matrix, clamped at zero, descending.
fn psd_eigenvalues(g: &Matrix) -> Vec<f64> {
    let sym = (g + g.transpose()) * 0.5;
    let mut e: Vec<f64> = sym
        .symmetric_eigenvalues()
        .iter()
        .map(|l| l.max(0.0))
        .collect();
    e.sort_by(|x, y| y.partial_cmp(x).unwrap());
    e
}

/// log det(D D^T + sigma2 I) for an M-row dictionary with Gram spectrum `lam`.
fn structured_log_det(lam: &[f64], sigma2: f64, ambient: usize) -> Result<f64> {
    let mut ld = 0.0;
    for &l in lam {
        let v = l + sigma2;
        if v <= 0.0 {
            return Err(Error::SingularCovariance);
        }
        ld += v.ln();
    }
    if ambient > lam.len() {
        if sigma2 <= 0.0 {
            return Err(Error::SingularCovariance);
        }
        ld += (ambient - lam.len()) as f64 * sigma2.ln();
    }
    Ok(ld)
}

/// Pairwise Bhattacharyya bound for two zero-mean Kronecker-structured
/// classes, evaluated from factor Gram spectra. Equals `bhattacharyya_bound`
/// on the explicit covariances to 1e-8 relative, at a fraction of the cost.
pub fn pairwise_ks_bound(ci: &KSClass, cj: &KSClass, sigma2: f64) -> Result<f64> {
    if ci.factor_dims() != cj.factor_dims() {
        return Err(Error::DimensionMismatch {
            context: "pairwise bound needs classes with identical factor shapes".into(),
        });
    }
    let (m1, m2, n1, n2) = ci.factor_dims();
    let (m, n) = (m1 * m2, n1 * n2);

    let lam_i = psd_eigenvalues(&dictionary_gram(ci, ci));
    let lam_j = psd_eigenvalues(&dictionary_gram(cj, cj));
    let ld_i = structured_log_det(&lam_i, sigma2, m)?;
    let ld_j = structured_log_det(&lam_j, sigma2, m)?;

    // Spectrum of D_i D_i^T + D_j D_j^T through the stacked 2N x 2N Gram;
    // the (M - 2N) ambient directions contribute plain noise. When 2N > M
    // the Gram's extra zero eigenvalues cancel against the negative count.
    let mut g = Matrix::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(&dictionary_gram(ci, ci));
    g.view_mut((n, n), (n, n)).copy_from(&dictionary_gram(cj, cj));
    let gij = dictionary_gram(ci, cj);
    g.view_mut((0, n), (n, n)).copy_from(&gij);
    g.view_mut((n, 0), (n, n)).copy_from(&gij.transpose());
    let nu = psd_eigenvalues(&g);
    let halved: Vec<f64> = nu.iter().map(|v| v / 2.0).collect();
    let mut ld_bar = 0.0;
    for &v in &halved {
        let t = v + sigma2;
        if t <= 0.0 {
            return Err(Error::SingularCovariance);
        }
        ld_bar += t.ln();
    }
    if m >= 2 * n {
        if sigma2 <= 0.0 && m > 2 * n {
            return Err(Error::SingularCovariance);
        }
        if m > 2 * n {
            ld_bar += (m - 2 * n) as f64 * sigma2.ln();
        }
    } else {
        if sigma2 <= 0.0 {
            return Err(Error::SingularCovariance);
        }
        ld_bar -= (2 * n - m) as f64 * sigma2.ln();
    }

    let b = 0.5 * ld_bar - 0.25 * ld_i - 0.25 * ld_j;
    Ok(0.5 * (-b).exp())
}

/// High-SNR bound with the default truncation-index variant.
pub fn high_snr_angle_bound(
    ci: &KSClass,
    cj: &KSClass,
    sigma2: f64,
    tol: &RankTolerance,
) -> Result<AngleBound> {
    high_snr_angle_bound_with(ci, cj, sigma2, tol, TruncationVariant::default())
}

/// High-SNR misclassification bound in terms of the pair's principal
/// angles: c1 * (sigma2)^{(r*-n1n2)/2} * prod(1 - cos^2 cos^2)^{-1/2}, the
/// product running over factor-angle indices past the truncation points.
///
/// The constant c1 splits the pair geometry into the subspace intersection
/// (restricted covariances and their pseudo-determinant) and the set-minus
/// parts (restricted spectra outside the intersection).
pub fn high_snr_angle_bound_with(
    ci: &KSClass,
    cj: &KSClass,
    sigma2: f64,
    tol: &RankTolerance,
    variant: TruncationVariant,
) -> Result<AngleBound> {
    if ci.factor_dims() != cj.factor_dims() {
        return Err(Error::DimensionMismatch {
            context: "angle bound needs classes with identical factor shapes".into(),
        });
    }
    if sigma2 <= 0.0 {
        return Err(Error::ZeroNoise);
    }
    let (_, _, n1, n2) = ci.factor_dims();
    let n = n1 * n2;
    let di = ci.dictionary();
    let dj = cj.dictionary();
    let ui = orthonormal_basis(&di, tol)?;
    let uj = orthonormal_basis(&dj, tol)?;
    let (ri, rj) = (ui.ncols(), uj.ncols());
    let mut stacked = Matrix::zeros(di.nrows(), di.ncols() + dj.ncols());
    stacked.columns_mut(0, di.ncols()).copy_from(&di);
    stacked.columns_mut(di.ncols(), dj.ncols()).copy_from(&dj);
    let r_star = numerical_rank(&stacked, tol);
    let r_cap = ri + rj - r_star;

    let cov_i = &di * di.transpose();
    let cov_j = &dj * dj.transpose();

    // Intersection basis: the r_cap leading principal vectors between the
    // two ranges (their cosines are 1 up to tolerance).
    let mut log_c1 = (n as f64 - 2.0) / 2.0 * std::f64::consts::LN_2;
    let w = if r_cap > 0 {
        let svd = (ui.transpose() * &uj).svd(true, false);
        let p = svd.u.as_ref().expect("left singular vectors requested");
        let w = &ui * p.columns(0, r_cap).into_owned();
        let ci_cap = w.transpose() * &cov_i * &w;
        let cj_cap = w.transpose() * &cov_j * &w;
        let pdet_sum = pseudo_determinant(&symmetrize(&(&ci_cap + &cj_cap)), tol)?;
        let mut log_inner = pdet_sum.ln();
        for g in [&ci_cap, &cj_cap] {
            for l in psd_eigenvalues(g) {
                if l <= 0.0 {
                    return Err(Error::SingularCovariance);
                }
                log_inner -= 0.5 * l.ln();
            }
        }
        log_c1 -= 0.5 * log_inner;
        Some(w)
    } else {
        None
    };

    // Set-minus spectra: each range projected off the intersection.
    for (u, cov) in [(&ui, &cov_i), (&uj, &cov_j)] {
        let deflated = match &w {
            Some(w) => u - w * (w.transpose() * u),
            None => u.clone(),
        };
        let v = orthonormal_basis(&deflated, tol)?;
        for l in psd_eigenvalues(&(v.transpose() * cov * &v)) {
            if l <= 0.0 {
                return Err(Error::SingularCovariance);
            }
            log_c1 -= 0.25 * l.ln();
        }
    }

    let t1 = truncation_index(n2 as i64 - n1 as i64, r_cap, n1, variant);
    let t2 = truncation_index(n1 as i64 - n2 as i64, r_cap, n2, variant);

    let ca = factor_cosines(&ci.a, &cj.a, tol)?;
    let cb = factor_cosines(&ci.b, &cj.b, tol)?;
    let mut log_prod = 0.0;
    for p in t1..n1 {
        for q in t2..n2 {
            let term = 1.0 - ca[p] * ca[p] * cb[q] * cb[q];
            if term < 1e-14 {
                return Err(Error::DegenerateAngles { p, q, term });
            }
            log_prod += term.ln();
        }
    }

    let exponent = (r_star as f64 - n as f64) / 2.0;
    let bound = (log_c1 + exponent * sigma2.ln() - 0.5 * log_prod).exp();
    Ok(AngleBound { bound, c1: log_c1.exp(), t1, t2 })
}

fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// floor((diff +/- sqrt(diff^2 + 4 r_cap)) / 2), clamped into [0, limit].
fn truncation_index(diff: i64, r_cap: usize, limit: usize, variant: TruncationVariant) -> usize {
    let disc = ((diff * diff) as f64 + 4.0 * r_cap as f64).sqrt();
    let raw = match variant {
        TruncationVariant::MinusRoot => (diff as f64 - disc) / 2.0,
        TruncationVariant::PlusRoot => (diff as f64 + disc) / 2.0,
    };
    (raw.floor().max(0.0) as usize).min(limit)
}

/// Descending principal-angle cosines between the ranges of two factors.
fn factor_cosines(fi: &Matrix, fj: &Matrix, tol: &RankTolerance) -> Result<Vec<f64>> {
    let ui = orthonormal_basis(fi, tol)?;
    let uj = orthonormal_basis(fj, tol)?;
    Ok(principal_angles(&ui, &uj)?.cosines())
}

/// Union bound on ensemble misclassification: the average over classes of
/// the summed pairwise bounds against every other class, capped at 1.
pub fn union_bound_pe(ens: &KSEnsemble, sigma2: f64) -> Result<f64> {
    let l = ens.dims.l;
    if l < 2 {
        return Err(Error::InsufficientData {
            context: "union bound needs at least 2 classes".into(),
        });
    }
    let mut total = 0.0;
    for i in 0..l {
        for j in (i + 1)..l {
            total += 2.0 * pairwise_ks_bound(&ens.classes[i], &ens.classes[j], sigma2)?;
        }
    }
    Ok((total / l as f64).min(1.0))
}

/// Scaling ratios for the capacity regime: subspace and measurement factor
/// dimensions grow linearly with ambient size, n_i = nu_i m, m_i = kappa_i m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub sigma2: f64,
}

/// Capacity bounds in bits per (normalized) dimension, to prelog order.
/// The O(1) terms of the underlying expansions are omitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityBounds {
    pub upper: f64,
    pub lower: f64,
    pub prelog_upper: f64,
    pub prelog_lower: f64,
}

/// Upper and lower bounds on the classification capacity for given scaling
/// ratios, as prelog * log2(1/sigma2).
pub fn capacity_bounds(p: &CapacityParams) -> Result<CapacityBounds> {
    for (name, v) in [("kappa1", p.kappa1), ("kappa2", p.kappa2)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::InvalidRatio { context: format!("{name} = {v} outside (0, 1]") });
        }
    }
    for (name, nu, kappa) in [("nu1", p.nu1, p.kappa1), ("nu2", p.nu2, p.kappa2)] {
        if !(nu > 0.0 && nu <= kappa) {
            return Err(Error::InvalidRatio {
                context: format!("{name} = {nu} outside (0, kappa = {kappa}]"),
            });
        }
    }
    if !(p.sigma2 > 0.0 && p.sigma2 < 1.0) {
        return Err(Error::InvalidRatio {
            context: format!("sigma2 = {} outside (0, 1)", p.sigma2),
        });
    }
    let denom = 2.0 * p.kappa1 * p.kappa2;
    let prelog_upper = p.nu1.min(p.nu2) * (p.kappa1 - p.nu1 + p.kappa2 - p.nu2) / denom;
    let prelog_lower =
        (p.nu1 * p.nu2 - pos(2.0 * p.nu1 - p.kappa1) * pos(2.0 * p.nu2 - p.kappa2)) / denom;
    let log_snr = (1.0 / p.sigma2).log2();
    Ok(CapacityBounds {
        upper: prelog_upper * log_snr,
        lower: prelog_lower * log_snr,
        prelog_upper,
        prelog_lower,
    })
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// Right-hand side of the rate-achievability condition at a given retained
/// eigenvalue threshold: a growth rate below this value certifies that the
/// misclassification probability vanishes. The log term scales like
/// (d_ks / (2 m1 m2)) * log2(1/sigma2) as the noise shrinks.
pub fn achievable_rate_margin(dims: Dims, lambda_threshold: f64, sigma2: f64) -> f64 {
    assert!(lambda_threshold > 0.0, "eigenvalue threshold must be positive");
    assert!(sigma2 > 0.0, "noise variance must be positive");
    let m = (dims.m1 * dims.m2) as f64;
    let d_ks = diversity_order(dims).d_ks as f64;
    let base = (dims.subspace() as f64 - 2.0) / (2.0 * m);
    base - d_ks / (2.0 * m) * (1.0 + lambda_threshold / sigma2).log2()
}

/// Full per-pair and union bound evaluation over an SNR grid.
pub fn bound_report(
    ens: &KSEnsemble,
    snr_db: &[f64],
    tol: &RankTolerance,
    variant: TruncationVariant,
) -> Result<BoundReport> {
    let l = ens.dims.l;
    if l < 2 {
        return Err(Error::InsufficientData {
            context: "bound report needs at least 2 classes".into(),
        });
    }
    let sigmas: Vec<f64> = snr_db.iter().map(|db| 10f64.powf(-db / 10.0)).collect();
    let mut pairs = Vec::new();
    for i in 0..l {
        for j in (i + 1)..l {
            pairs.push([i, j]);
        }
    }
    let mut pairwise_bound = Vec::with_capacity(pairs.len());
    let mut angle_bound = Vec::with_capacity(pairs.len());
    let mut angle_note = Vec::with_capacity(pairs.len());
    let mut c1 = Vec::with_capacity(pairs.len());
    let mut t1 = Vec::with_capacity(pairs.len());
    let mut t2 = Vec::with_capacity(pairs.len());
    for &[i, j] in &pairs {
        let (ci, cj) = (&ens.classes[i], &ens.classes[j]);
        let mut pw = Vec::with_capacity(sigmas.len());
        for &s2 in &sigmas {
            pw.push(pairwise_ks_bound(ci, cj, s2)?);
        }
        pairwise_bound.push(pw);
        let mut ab = Vec::with_capacity(sigmas.len());
        let mut note = None;
        let mut pair_c1 = None;
        let mut pair_t = (None, None);
        for &s2 in &sigmas {
            match high_snr_angle_bound_with(ci, cj, s2, tol, variant) {
                Ok(r) => {
                    ab.push(Some(r.bound));
                    pair_c1 = Some(r.c1);
                    pair_t = (Some(r.t1), Some(r.t2));
                }
                Err(Error::DegenerateAngles { p, q, term }) => {
                    ab.push(None);
                    note = Some(format!(
                        "angle product term at ({p},{q}) is {term:.3e}, below 1e-14"
                    ));
                }
                Err(e) => return Err(e),
            }
        }
        angle_bound.push(ab);
        angle_note.push(note);
        c1.push(pair_c1);
        t1.push(pair_t.0);
        t2.push(pair_t.1);
    }
    let mut union = Vec::with_capacity(sigmas.len());
    for &s2 in &sigmas {
        union.push(union_bound_pe(ens, s2)?);
    }
    Ok(BoundReport {
        snr_db: snr_db.to_vec(),
        pairs,
        pairwise_bound,
        union_bound: union,
        angle_bound,
        angle_note,
        c1,
        t1,
        t2,
    })
}
