//! The Kronecker-structured generative model: problem dimensions, class
//! factor pairs, the Gaussian prior over dictionaries, signal sampling, and
//! the eigen-factored class covariance used by the classifier and the bounds.
//!
//! Conventions fixed here: vec() is column-major stacking, so
//! vec(A X B^T) = (B kron A) vec(X) holds exactly, and SNR = 1/sigma^2
//! (10*log10(1/sigma^2) in dB).

use nalgebra::DVector;
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensorlin::{kron, Matrix};

/// Problem dimensions: signals are m1 x m2, factor subspaces n1 x n2,
/// with `l` classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub m1: usize,
    pub m2: usize,
    pub n1: usize,
    pub n2: usize,
    /// Class count L.
    pub l: usize,
}

impl Dims {
    /// Invariants: 1 <= n1 <= m1, 1 <= n2 <= m2, l >= 1.
    pub fn new(m1: usize, m2: usize, n1: usize, n2: usize, l: usize) -> Result<Self> {
        if n1 < 1 || n1 > m1 || n2 < 1 || n2 > m2 {
            return Err(Error::DimensionMismatch {
                context: format!("need 1 <= n1 <= m1 and 1 <= n2 <= m2, got n=({n1},{n2}) m=({m1},{m2})"),
            });
        }
        if l < 1 {
            return Err(Error::DimensionMismatch {
                context: "class count must be at least 1".into(),
            });
        }
        Ok(Self { m1, m2, n1, n2, l })
    }

    /// Ambient (vectorized signal) dimension m1*m2.
    pub fn ambient(&self) -> usize {
        self.m1 * self.m2
    }

    /// Subspace dimension n1*n2.
    pub fn subspace(&self) -> usize {
        self.n1 * self.n2
    }
}

/// One class's factor pair: A is m1 x n1, B is m2 x n2. The class subspace
/// is the range of B kron A.
#[derive(Debug, Clone, PartialEq)]
pub struct KSClass {
    pub a: Matrix,
    pub b: Matrix,
}

impl KSClass {
    /// Invariant: all entries finite.
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch {
                context: "class factors must have finite entries".into(),
            });
        }
        Ok(Self { a, b })
    }

    /// (m1, m2, n1, n2) implied by the factor shapes.
    pub fn factor_dims(&self) -> (usize, usize, usize, usize) {
        (self.a.nrows(), self.b.nrows(), self.a.ncols(), self.b.ncols())
    }

    /// The explicit m1m2 x n1n2 dictionary B kron A.
    pub fn dictionary(&self) -> Matrix {
        kron(&self.b, &self.a)
    }
}

/// An ordered tuple of classes sharing one set of dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct KSEnsemble {
    pub dims: Dims,
    pub classes: Vec<KSClass>,
}

impl KSEnsemble {
    pub fn new(dims: Dims, classes: Vec<KSClass>) -> Result<Self> {
        if classes.len() != dims.l {
            return Err(Error::DimensionMismatch {
                context: format!("expected {} classes, got {}", dims.l, classes.len()),
            });
        }
        for (i, c) in classes.iter().enumerate() {
            if c.factor_dims() != (dims.m1, dims.m2, dims.n1, dims.n2) {
                return Err(Error::DimensionMismatch {
                    context: format!("class {i} factor shapes disagree with dims"),
                });
            }
        }
        Ok(Self { dims, classes })
    }
}

/// A reproducible, splittable randomness source. Identical (seed,
/// stream_index) pairs reproduce identical draws; distinct stream indices
/// give statistically independent streams, so Monte Carlo trials can be
/// parallelized deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// Derived stream with the same seed and a different index.
    pub fn substream(&self, stream_index: u64) -> Self {
        Self { seed: self.seed, stream_index }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Matrix with iid N(0, std^2) entries, filled in column order.
pub(crate) fn gaussian_matrix(rows: usize, cols: usize, std: f64, rng: &mut ChaCha12Rng) -> Matrix {
    Matrix::from_iterator(
        rows,
        cols,
        (0..rows * cols).map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            std * z
        }),
    )
}

/// Draw an ensemble from the prior: every A entry iid N(0, 1/n1), every B
/// entry iid N(0, 1/n2).
pub fn sample_ensemble(dims: Dims, stream: RngStream) -> KSEnsemble {
    let mut rng = stream.rng();
    let a_std = (1.0 / dims.n1 as f64).sqrt();
    let b_std = (1.0 / dims.n2 as f64).sqrt();
    let classes = (0..dims.l)
        .map(|_| KSClass {
            a: gaussian_matrix(dims.m1, dims.n1, a_std, &mut rng),
            b: gaussian_matrix(dims.m2, dims.n2, b_std, &mut rng),
        })
        .collect();
    KSEnsemble { dims, classes }
}

/// Draw one signal Y = A X B^T + Z with X iid standard normal and Z iid
/// N(0, sigma2).
pub fn sample_signal(cls: &KSClass, sigma2: f64, stream: RngStream) -> Matrix {
    assert!(sigma2 >= 0.0, "noise variance must be nonnegative");
    let (m1, m2, n1, n2) = cls.factor_dims();
    let mut rng = stream.rng();
    let x = gaussian_matrix(n1, n2, 1.0, &mut rng);
    let z = gaussian_matrix(m1, m2, sigma2.sqrt(), &mut rng);
    &cls.a * x * cls.b.transpose() + z
}

/// Class covariance Sigma = U diag(eigvals) U^T + sigma2 I in factored form.
///
/// U's columns are Kronecker products of the factor singular bases, permuted
/// so that eigvals (the Kronecker product of the factor Gram eigenvalues)
/// come out sorted descending. Never materializes the dense m1m2 x m1m2
/// covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredCovariance {
    pub u: Matrix,
    pub eigvals: Vec<f64>,
    pub sigma2: f64,
}

impl StructuredCovariance {
    /// Ambient dimension M = m1*m2.
    pub fn ambient_dim(&self) -> usize {
        self.u.nrows()
    }

    /// Structured-part dimension N = n1*n2.
    pub fn subspace_dim(&self) -> usize {
        self.u.ncols()
    }

    /// Explicit dense covariance, for oracles and small problems only.
    pub fn dense(&self) -> Matrix {
        let m = self.ambient_dim();
        let lam = Matrix::from_diagonal(&DVector::from_row_slice(&self.eigvals));
        &self.u * lam * self.u.transpose() + Matrix::identity(m, m) * self.sigma2
    }
}

/// Eigen-factored covariance of vec(Y) for one class at a given noise level.
pub fn structured_covariance(cls: &KSClass, sigma2: f64) -> StructuredCovariance {
    assert!(sigma2 >= 0.0, "noise variance must be nonnegative");
    let (m1, m2, n1, n2) = cls.factor_dims();
    let svd_a = cls.a.clone().svd(true, false);
    let svd_b = cls.b.clone().svd(true, false);
    let ua = svd_a.u.expect("left singular vectors requested");
    let ub = svd_b.u.expect("left singular vectors requested");
    let la: Vec<f64> = svd_a.singular_values.iter().map(|s| s * s).collect();
    let lb: Vec<f64> = svd_b.singular_values.iter().map(|s| s * s).collect();

    let n = n1 * n2;
    // Kronecker index k = q*n1 + p pairs column p of U_A with column q of U_B.
    let mut order: Vec<usize> = (0..n).collect();
    let lam: Vec<f64> = (0..n).map(|k| lb[k / n1] * la[k % n1]).collect();
    order.sort_by(|&i, &j| lam[j].partial_cmp(&lam[i]).unwrap());

    let mut u = Matrix::zeros(m1 * m2, n);
    let mut eigvals = Vec::with_capacity(n);
    for (out, &k) in order.iter().enumerate() {
        let (q, p) = (k / n1, k % n1);
        for i2 in 0..m2 {
            for i1 in 0..m1 {
                u[(i2 * m1 + i1, out)] = ub[(i2, q)] * ua[(i1, p)];
            }
        }
        eigvals.push(lam[k]);
    }
    StructuredCovariance { u, eigvals, sigma2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorlin::{numerical_rank, RankTolerance};

    #[test]
    fn dims_validation() {
        assert!(Dims::new(4, 4, 2, 2, 2).is_ok());
        assert!(Dims::new(4, 4, 5, 2, 2).is_err());
        assert!(Dims::new(4, 4, 0, 2, 2).is_err());
        assert!(Dims::new(4, 4, 2, 2, 0).is_err());
    }

    #[test]
    fn prior_is_zero_mean_with_variance_one_over_n() {
        // Aggregate A entries across ensembles until 10^6 draws.
        let dims = Dims::new(4, 4, 2, 2, 1).unwrap();
        let per = dims.m1 * dims.n1;
        let want = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let mut count = 0usize;
        let mut idx = 0u64;
        while count < want {
            let ens = sample_ensemble(dims, RngStream::new(123, idx));
            for v in ens.classes[0].a.iter() {
                sum += v;
                sumsq += v * v;
            }
            count += per;
            idx += 1;
        }
        let mean = sum / count as f64;
        let var = sumsq / count as f64 - mean * mean;
        assert!(mean.abs() < 5e-3, "mean {mean}");
        let rel = (var - 0.5).abs() / 0.5;
        assert!(rel < 0.01, "variance {var} off by {rel}");
    }

    #[test]
    fn distinct_streams_give_distinct_ensembles() {
        let dims = Dims::new(4, 4, 2, 2, 2).unwrap();
        let e1 = sample_ensemble(dims, RngStream::new(7, 0));
        let e2 = sample_ensemble(dims, RngStream::new(7, 1));
        assert_ne!(e1.classes[0].a, e2.classes[0].a);
        let e1b = sample_ensemble(dims, RngStream::new(7, 0));
        assert_eq!(e1.classes[0].a, e1b.classes[0].a);
        assert_eq!(e1.classes[1].b, e1b.classes[1].b);
    }

    #[test]
    fn zero_factors_give_pure_noise_with_identity_covariance() {
        let cls = KSClass::new(Matrix::zeros(2, 1), Matrix::zeros(2, 1)).unwrap();
        let draws = 50_000;
        let m = 4;
        let mut cov = Matrix::zeros(m, m);
        for t in 0..draws {
            let y = sample_signal(&cls, 1.0, RngStream::new(55, t));
            let v = DVector::from_column_slice(y.as_slice());
            cov += &v * v.transpose();
        }
        cov /= draws as f64;
        let dev = (&cov - Matrix::identity(m, m)).abs().max();
        // Covariance entry estimator std is about sqrt(2/draws).
        let tol = 5.0 * (2.0 / draws as f64).sqrt();
        assert!(dev < tol, "max covariance deviation {dev} vs {tol}");
    }

    #[test]
    fn noiseless_rank_one_signal() {
        let dims = Dims::new(3, 4, 1, 1, 1).unwrap();
        let ens = sample_ensemble(dims, RngStream::new(9, 0));
        let y = sample_signal(&ens.classes[0], 0.0, RngStream::new(9, 1));
        assert_eq!(numerical_rank(&y, &RankTolerance::default()), 1);
    }

    #[test]
    fn sample_covariance_matches_structured_form() {
        let dims = Dims::new(3, 3, 2, 2, 1).unwrap();
        let ens = sample_ensemble(dims, RngStream::new(21, 0));
        let cls = &ens.classes[0];
        let sigma2 = 0.1;
        let d = cls.dictionary();
        let truth = &d * d.transpose() + Matrix::identity(9, 9) * sigma2;

        let draws = 100_000;
        let mut cov = Matrix::zeros(9, 9);
        for t in 0..draws {
            let y = sample_signal(cls, sigma2, RngStream::new(22, t));
            let v = DVector::from_column_slice(y.as_slice());
            cov += &v * v.transpose();
        }
        cov /= draws as f64;
        for i in 0..9 {
            for j in 0..9 {
                let std = ((truth[(i, i)] * truth[(j, j)] + truth[(i, j)].powi(2))
                    / draws as f64)
                    .sqrt();
                let dev = (cov[(i, j)] - truth[(i, j)]).abs();
                assert!(dev <= 5.0 * std, "entry ({i},{j}) dev {dev} vs 5 std {}", 5.0 * std);
            }
        }
    }

    #[test]
    fn vec_identity_on_random_instances() {
        for seed in 0..5 {
            let dims = Dims::new(4, 5, 2, 3, 1).unwrap();
            let ens = sample_ensemble(dims, RngStream::new(seed, 0));
            let cls = &ens.classes[0];
            let mut rng = RngStream::new(seed, 1).rng();
            let x = gaussian_matrix(2, 3, 1.0, &mut rng);
            let left = &cls.a * &x * cls.b.transpose();
            let lhs = DVector::from_column_slice(left.as_slice());
            let rhs = cls.dictionary() * DVector::from_column_slice(x.as_slice());
            assert!((lhs - rhs).abs().max() < 1e-12);
        }
    }

    #[test]
    fn orthonormal_factors_give_unit_eigenvalues() {
        let mut rng = RngStream::new(31, 0).rng();
        let qa = gaussian_matrix(5, 2, 1.0, &mut rng).qr().q();
        let qb = gaussian_matrix(4, 3, 1.0, &mut rng).qr().q();
        let cls = KSClass::new(qa, qb).unwrap();
        let cov = structured_covariance(&cls, 0.01);
        assert_eq!(cov.eigvals.len(), 6);
        for l in &cov.eigvals {
            assert!((l - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_one_eigenvalue_is_squared_norm_product() {
        let a = Matrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0]);
        let b = Matrix::from_column_slice(2, 1, &[3.0, 4.0]);
        let cls = KSClass::new(a, b).unwrap();
        let cov = structured_covariance(&cls, 0.0);
        assert_eq!(cov.eigvals.len(), 1);
        assert!((cov.eigvals[0] - 9.0 * 25.0).abs() < 1e-10);
    }

    #[test]
    fn structured_covariance_reconstructs_dense_form() {
        let dims = Dims::new(4, 3, 2, 2, 1).unwrap();
        let ens = sample_ensemble(dims, RngStream::new(41, 0));
        let cls = &ens.classes[0];
        let sigma2 = 0.05;
        let cov = structured_covariance(cls, sigma2);
        let d = cls.dictionary();
        let truth = &d * d.transpose() + Matrix::identity(12, 12) * sigma2;
        assert!((cov.dense() - truth).abs().max() < 1e-8);
        assert!(
            (cov.u.transpose() * &cov.u - Matrix::identity(4, 4)).abs().max() < 1e-10,
            "U must be orthonormal"
        );
        for w in cov.eigvals.windows(2) {
            assert!(w[0] >= w[1], "eigvals must be sorted descending");
        }
    }

    #[test]
    fn structured_eigenvalues_match_dense_spectrum() {
        let dims = Dims::new(4, 4, 2, 2, 1).unwrap();
        let ens = sample_ensemble(dims, RngStream::new(43, 0));
        let cls = &ens.classes[0];
        let sigma2 = 0.3;
        let cov = structured_covariance(cls, sigma2);
        let mut expected: Vec<f64> = cov.eigvals.iter().map(|l| l + sigma2).collect();
        expected.extend(std::iter::repeat(sigma2).take(12));
        expected.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let mut dense_eigs: Vec<f64> = cov.dense().symmetric_eigenvalues().iter().cloned().collect();
        dense_eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (e, d) in expected.iter().zip(dense_eigs.iter()) {
            assert!((e - d).abs() < 1e-10, "eigenvalue {d} vs expected {e}");
        }
    }

    #[test]
    fn signals_reproducible_from_stream() {
        let dims = Dims::new(4, 4, 2, 2, 1).unwrap();
        let ens = sample_ensemble(dims, RngStream::new(77, 0));
        let y1 = sample_signal(&ens.classes[0], 0.01, RngStream::new(88, 5));
        let y2 = sample_signal(&ens.classes[0], 0.01, RngStream::new(88, 5));
        assert_eq!(y1, y2);
        let y3 = sample_signal(&ens.classes[0], 0.01, RngStream::new(88, 6));
        assert_ne!(y1, y3);
    }

    #[test]
    fn ensemble_shape_validation() {
        let dims = Dims::new(4, 4, 2, 2, 2).unwrap();
        let one = sample_ensemble(Dims::new(4, 4, 2, 2, 1).unwrap(), RngStream::new(1, 0));
        assert!(KSEnsemble::new(dims, one.classes.clone()).is_err());
        let bad = KSClass::new(Matrix::zeros(3, 2), Matrix::zeros(4, 2)).unwrap();
        assert!(KSEnsemble::new(dims, vec![one.classes[0].clone(), bad]).is_err());
    }
}
