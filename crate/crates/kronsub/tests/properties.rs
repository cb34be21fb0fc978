//! Randomized invariants over the public surface: algebraic identities the
//! dense linear algebra must satisfy, structural facts about the model and
//! its reports, and lossless round trips for the text formats.

use kronsub::bounds::{capacity_bounds, pairwise_ks_bound, CapacityParams};
use kronsub::classifier::{empirical_slope, PeCurve};
use kronsub::dataio::{format_tensor_file, parse_tensor_file, LabeledDataset};
use kronsub::geometry::{diversity_order, expected_pair_rank};
use kronsub::ksld2::nre;
use kronsub::model::{sample_ensemble, structured_covariance, Dims, RngStream};
use kronsub::tensorlin::{
    intersection_dimension, kron, numerical_rank, orthonormal_basis, principal_angles,
    pseudo_determinant, Matrix, RankTolerance,
};
use proptest::prelude::*;

fn mat(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-4.0..4.0f64, rows * cols)
        .prop_map(move |v| Matrix::from_vec(rows, cols, v))
}

/// Smallest singular value, to rule out near-degenerate random draws.
fn min_sv(m: &Matrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

fn dims_strategy() -> impl Strategy<Value = Dims> {
    (2usize..=5, 2usize..=5)
        .prop_flat_map(|(m1, m2)| (Just(m1), Just(m2), 1..=m1.min(3), 1..=m2.min(3)))
        .prop_map(|(m1, m2, n1, n2)| Dims::new(m1, m2, n1, n2, 2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_satisfies_the_mixed_product_rule(
        a in mat(3, 2), b in mat(2, 3), c in mat(2, 3), d in mat(3, 2),
    ) {
        let lhs = kron(&a, &b) * kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        prop_assert!((lhs - &rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn vectorization_turns_factor_products_into_kron(
        a in mat(4, 2), x in mat(2, 3), b in mat(5, 3),
    ) {
        let direct = &a * &x * b.transpose();
        let xv = Matrix::from_column_slice(6, 1, x.as_slice());
        let lifted = kron(&b, &a) * xv;
        for (u, v) in direct.as_slice().iter().zip(lifted.as_slice()) {
            prop_assert!((u - v).abs() <= 1e-10);
        }
    }

    #[test]
    fn orthonormal_basis_is_orthonormal_and_spans(m in mat(5, 3)) {
        let tol = RankTolerance::default();
        prop_assume!(numerical_rank(&m, &tol) > 0);
        let q = orthonormal_basis(&m, &tol).unwrap();
        let gram = q.transpose() * &q;
        let k = q.ncols();
        prop_assert!((gram - Matrix::identity(k, k)).norm() <= 1e-10);
        let projected = &q * (q.transpose() * &m);
        prop_assert!((projected - &m).norm() <= 1e-8 * m.norm());
    }

    #[test]
    fn rank_is_multiplicative_under_kron(a in mat(4, 2), b in mat(3, 3)) {
        prop_assume!(min_sv(&a) > 1e-3 && min_sv(&b) > 1e-3);
        let tol = RankTolerance::default();
        let ra = numerical_rank(&a, &tol);
        let rb = numerical_rank(&b, &tol);
        prop_assert_eq!(numerical_rank(&kron(&a, &b), &tol), ra * rb);
    }

    #[test]
    fn principal_angle_cosines_are_sorted_unit_interval(
        m1 in mat(6, 2), m2 in mat(6, 3),
    ) {
        let tol = RankTolerance::default();
        prop_assume!(min_sv(&m1) > 1e-3 && min_sv(&m2) > 1e-3);
        let q1 = orthonormal_basis(&m1, &tol).unwrap();
        let q2 = orthonormal_basis(&m2, &tol).unwrap();
        let cos = principal_angles(&q1, &q2).unwrap().cosines();
        for w in cos.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-12);
        }
        for c in &cos {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(c));
        }
        let self_cos = principal_angles(&q1, &q1).unwrap().cosines();
        for c in self_cos {
            prop_assert!((c - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn pseudo_determinant_is_the_nonzero_eigenvalue_product(
        m in mat(5, 2), scale in 0.2..3.0f64,
    ) {
        let tol = RankTolerance::default();
        prop_assume!(min_sv(&m) > 1e-3);
        let q = orthonormal_basis(&m, &tol).unwrap();
        // scale * Q Q^T has eigenvalue `scale` with multiplicity 2, rest 0.
        let s = scale * &q * q.transpose();
        let pdet = pseudo_determinant(&s, &tol).unwrap();
        prop_assert!((pdet - scale * scale).abs() <= 1e-8 * scale * scale);
    }

    #[test]
    fn shared_columns_set_the_intersection_dimension(
        m in mat(7, 5), x in 0usize..=2,
    ) {
        let tol = RankTolerance::default();
        prop_assume!(min_sv(&m) > 1e-3);
        let q = orthonormal_basis(&m, &tol).unwrap();
        prop_assume!(q.ncols() == 5);
        // U1 takes columns 0..3; U2 takes x shared columns plus fresh ones.
        let u1 = q.columns(0, 3).into_owned();
        let mut u2 = Matrix::zeros(7, 2 + x);
        for j in 0..x {
            u2.set_column(j, &q.column(j));
        }
        for j in 0..2 {
            u2.set_column(x + j, &q.column(3 + j));
        }
        prop_assert_eq!(intersection_dimension(&u1, &u2, &tol).unwrap(), x);
    }

    #[test]
    fn covariance_trace_splits_into_signal_and_noise(
        dims in dims_strategy(), seed in any::<u64>(), sigma2 in 0.01..1.0f64,
    ) {
        let ens = sample_ensemble(dims, RngStream::new(seed, 0));
        let cov = structured_covariance(&ens.classes[0], sigma2);
        let dense = cov.dense();
        prop_assert!((&dense - dense.transpose()).norm() <= 1e-12 * dense.norm());
        let want = ens.classes[0].dictionary().norm_squared()
            + sigma2 * dims.ambient() as f64;
        prop_assert!((dense.trace() - want).abs() <= 1e-10 * want);
        for &ev in &cov.eigvals {
            prop_assert!(ev >= -1e-12);
        }
    }

    #[test]
    fn diversity_orders_are_consistent(dims in dims_strategy()) {
        let rep = diversity_order(dims);
        prop_assert_eq!(rep.gap, rep.d_std - rep.d_ks);
        prop_assert!(rep.d_ks <= rep.d_std);
        prop_assert!(rep.d_std <= dims.subspace());
        prop_assert_eq!(rep.d_ks, expected_pair_rank(dims) - dims.subspace());
    }

    #[test]
    fn pairwise_bound_is_a_symmetric_half_capped_probability(
        dims in dims_strategy(), seed in any::<u64>(), sigma2 in 0.01..1.0f64,
    ) {
        let ens = sample_ensemble(dims, RngStream::new(seed, 0));
        let bij = pairwise_ks_bound(&ens.classes[0], &ens.classes[1], sigma2).unwrap();
        let bji = pairwise_ks_bound(&ens.classes[1], &ens.classes[0], sigma2).unwrap();
        prop_assert!(bij > 0.0 && bij <= 0.5 + 1e-12);
        prop_assert!((bij - bji).abs() <= 1e-9 * bij);
    }

    #[test]
    fn dataset_text_round_trip_is_bit_exact(
        vals in prop::collection::vec(
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            24,
        ),
        labels in prop::collection::vec(0usize..3, 2),
    ) {
        let signals: Vec<Matrix> = vals
            .chunks(12)
            .map(|c| Matrix::from_column_slice(4, 3, c))
            .collect();
        let data = LabeledDataset::new((4, 3), signals, labels, 3).unwrap();
        let back = parse_tensor_file(&format_tensor_file(&data)).unwrap();
        prop_assert_eq!(back.labels(), data.labels());
        for (s, t) in back.signals().iter().zip(data.signals()) {
            for (u, v) in s.iter().zip(t.iter()) {
                prop_assert_eq!(u.to_bits(), v.to_bits());
            }
        }
    }

    #[test]
    fn nre_of_a_scaled_reconstruction_is_the_scale_gap_squared(
        y in mat(4, 4), t in 0.0..2.0f64,
    ) {
        prop_assume!(y.norm() > 1e-6);
        let yhat = (1.0 - t) * &y;
        let got = nre(&y, &yhat).unwrap();
        prop_assert!((got - t * t).abs() <= 1e-10 * (t * t).max(1.0));
    }

    #[test]
    fn slope_fit_recovers_an_exact_power_law(
        slope in 0.5..8.0f64, intercept in 0.0..2.0f64,
    ) {
        let snr_db: Vec<f64> = (0..9).map(|i| 20.0 + 5.0 * i as f64).collect();
        let pe: Vec<f64> = snr_db
            .iter()
            .map(|s| 10f64.powf(-(slope * s / 20.0 + intercept)))
            .collect();
        let curve = PeCurve { snr_db, pe, trials: 1000, seed: 0, classes: 2 };
        let got = empirical_slope(&curve, 0..9).unwrap();
        prop_assert!((got - slope).abs() <= 1e-9 * slope);
    }

    #[test]
    fn symmetric_capacity_bounds_close_their_quadratic_gap(
        kappa in 0.05..1.0f64, frac in 0.05..1.0f64, sigma2 in 1e-4..0.1f64,
    ) {
        let nu = kappa * frac;
        let p = CapacityParams { kappa1: kappa, kappa2: kappa, nu1: nu, nu2: nu, sigma2 };
        let b = capacity_bounds(&p).unwrap();
        prop_assert!(b.prelog_lower >= 0.0);
        prop_assert!(b.prelog_upper + 1e-12 >= b.prelog_lower);
        // The quadratic gap holds where the lower bound's positive part is
        // active (2 nu >= kappa); below that the clipped branch applies.
        let want_gap = if 2.0 * nu >= kappa {
            (kappa - nu).powi(2) / (2.0 * kappa * kappa)
        } else {
            (2.0 * nu * kappa - 3.0 * nu * nu) / (2.0 * kappa * kappa)
        };
        prop_assert!(
            ((b.prelog_upper - b.prelog_lower) - want_gap).abs() <= 1e-12,
            "gap {} vs {}",
            b.prelog_upper - b.prelog_lower,
            want_gap
        );
    }
}
