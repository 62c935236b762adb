use nalgebra::DMatrix;
use proptest::prelude::*;
use wmc_core::diagnostics::{diagnose, plugin_bounds, weighted_error_unnormalized};
use wmc_core::estimators::{
    debiased_maxnorm_projection, debiased_rank_projection, leverage_weight, maxnorm_solve,
    proportional_sampling_recovery, standard_rank_projection, EstimatorConfig, MaxNormOptions, ObservationMatrix,
};
use wmc_core::linalg::{gaussian_matrix, truncated_svd, DenseMatrix, RngSeed};
use wmc_core::pattern::SamplePattern;
use wmc_core::patterns::sample_bernoulli;
use wmc_core::weight::WeightMatrix;

fn low_rank(d1: usize, d2: usize, r: usize, seed: u64) -> DenseMatrix {
    let u = gaussian_matrix(d1, r, 1.0, RngSeed(seed)).unwrap();
    let v = gaussian_matrix(r, d2, 1.0, RngSeed(seed ^ 0xabcd)).unwrap();
    u.matmul(&v).unwrap()
}

fn rel(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm()
}

#[test]
fn standard_half_density_matches_svd_oracle() {
    let d = 30;
    let c = 1.7;
    let m = DenseMatrix::constant(d, d, c);
    let omega = sample_bernoulli(&WeightMatrix::constant(d, d, 0.5).unwrap(), RngSeed(4)).unwrap();
    let y = ObservationMatrix::observe(&m, None, &omega).unwrap();
    let est = standard_rank_projection(&y, &omega, &EstimatorConfig::new(1)).unwrap();

    let scale = (d * d) as f64 / omega.len() as f64;
    let a = y.values().scale(scale);
    let svd = DMatrix::from_row_slice(d, d, a.as_slice()).svd(true, true);
    let k = svd.singular_values.imax();
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let oracle = DenseMatrix::from_fn(d, d, |i, j| svd.singular_values[k] * u[(i, k)] * vt[(k, j)]);
    assert!(est.m_hat.sub(&oracle).unwrap().max_abs() < 1e-10);
    // close to c·1·1ᵀ on average
    let mean = est.m_hat.as_slice().iter().sum::<f64>() / (d * d) as f64;
    assert!((mean - c).abs() < 0.2 * c);
}

#[test]
fn debiased_error_within_rank_bound() {
    let (d, r) = (200, 5);
    let m0 = low_rank(d, d, r, 77);
    let m = m0.scale(1.0 / m0.max_abs());
    let w = WeightMatrix::constant(d, d, 0.3).unwrap();
    let omega = sample_bernoulli(&w, RngSeed(78)).unwrap();
    let z = gaussian_matrix(d, d, 1.0, RngSeed(79)).unwrap();
    let y = ObservationMatrix::observe(&m, Some(&z), &omega).unwrap();
    let cfg = EstimatorConfig::new(r).with_sigma(1.0);
    let est = debiased_rank_projection(&y, &omega, &w, &cfg).unwrap();
    let report = diagnose(&omega, &w).unwrap();
    let bounds = plugin_bounds(&report, r, m.max_abs(), 1.0).unwrap();
    let err = weighted_error_unnormalized(&w, &m, &est.m_hat).unwrap();
    assert!(err <= bounds.rank_bound, "{err} > {}", bounds.rank_bound);
}

#[test]
fn maxnorm_zero_observation_gives_zero() {
    let omega = SamplePattern::from_pairs(5, 5, [(0, 0), (1, 3), (4, 2)]).unwrap();
    let y = ObservationMatrix::observe(&DenseMatrix::zeros(5, 5), None, &omega).unwrap();
    let est = debiased_maxnorm_projection(&y, &omega, &WeightMatrix::ones(5, 5), &EstimatorConfig::new(1)).unwrap();
    assert_eq!(est.m_hat, DenseMatrix::zeros(5, 5));
}

#[test]
fn maxnorm_large_radius_reproduces_low_rank_target() {
    let (d1, d2, r) = (30, 24, 2);
    let m = low_rank(d1, d2, r, 5);
    let omega = SamplePattern::full(d1, d2);
    let y = ObservationMatrix::observe(&m, None, &omega).unwrap();
    let mut cfg = EstimatorConfig::new(r).with_radius(100.0).with_seed(RngSeed(1));
    cfg.maxnorm_iterations = 5000;
    let est = debiased_maxnorm_projection(&y, &omega, &WeightMatrix::ones(d1, d2), &cfg).unwrap();
    // the unconstrained minimizer is the target itself
    assert!(rel(&est.m_hat, &m) <= 1e-4, "{}", rel(&est.m_hat, &m));
}

#[test]
fn proportional_flat_and_budget() {
    let x = DenseMatrix::constant(9, 9, 3.0);
    let w = leverage_weight(&x, 40.0).unwrap();
    assert!((w.entry(4, 7) - 40.0 / 81.0).abs() < 1e-12);

    let x = low_rank(40, 30, 2, 6);
    let out = proportional_sampling_recovery(&x, 500.0, RngSeed(2)).unwrap();
    assert!(out.expected_queries <= 500.0 * (1.0 + 1e-12));
    assert_eq!(out.rank, 2);
}

fn perm(n: usize, keys: &[u32]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| keys[i]);
    idx
}

fn setup(seed: u64) -> (DenseMatrix, SamplePattern, WeightMatrix, ObservationMatrix) {
    let (d1, d2) = (16, 12);
    let w = WeightMatrix::new(
        (0..d1).map(|i| 0.3 + 0.04 * i as f64).collect(),
        (0..d2).map(|j| 0.95 - 0.05 * j as f64).collect(),
    )
    .unwrap();
    let m = low_rank(d1, d2, 2, seed);
    let omega = sample_bernoulli(&w, RngSeed(seed + 1)).unwrap();
    let z = gaussian_matrix(d1, d2, 0.3, RngSeed(seed + 2)).unwrap();
    let y = ObservationMatrix::observe(&m, Some(&z), &omega).unwrap();
    (m, omega, w, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn debiased_is_scale_equivariant(seed in 0u64..5000, c in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0]) {
        let (_, omega, w, y) = setup(seed);
        let cfg = EstimatorConfig::new(2);
        let base = debiased_rank_projection(&y, &omega, &w, &cfg).unwrap().m_hat;
        let scaled = debiased_rank_projection(&y.scaled(c), &omega, &w, &cfg).unwrap().m_hat;
        let diff = scaled.sub(&base.scale(c)).unwrap().frobenius_norm();
        prop_assert!(diff <= 1e-10 * base.scale(c).frobenius_norm());
    }

    #[test]
    fn debiased_is_permutation_equivariant(
        seed in 0u64..5000,
        rk in prop::collection::vec(any::<u32>(), 16),
        ck in prop::collection::vec(any::<u32>(), 12),
    ) {
        let (_, omega, w, y) = setup(seed);
        let (rp, cp) = (perm(16, &rk), perm(12, &ck));
        let cfg = EstimatorConfig::new(2);
        let base = debiased_rank_projection(&y, &omega, &w, &cfg).unwrap().m_hat;
        let moved = debiased_rank_projection(
            &y.permuted(&rp, &cp),
            &omega.permuted(&rp, &cp),
            &w.permuted(&rp, &cp),
            &cfg,
        ).unwrap().m_hat;
        let diff = moved.sub(&base.permuted(&rp, &cp)).unwrap().frobenius_norm();
        prop_assert!(diff <= 1e-9 * base.frobenius_norm().max(1.0));
    }

    #[test]
    fn maxnorm_trace_is_feasible_and_monotone(seed in 0u64..5000, radius in 0.1f64..5.0, r in 1usize..4) {
        let target = gaussian_matrix(18, 14, 1.0, RngSeed(seed)).unwrap();
        let mut opts = MaxNormOptions::new(radius, r);
        opts.seed = RngSeed(seed + 1);
        let sol = maxnorm_solve(&target, &opts).unwrap();
        let mut last = f64::INFINITY;
        for rec in &sol.trace {
            prop_assert!(rec.feasibility <= radius * (1.0 + 1e-12));
            if rec.accepted {
                prop_assert!(rec.objective <= last);
                last = rec.objective;
            }
        }
        prop_assert!(sol.x.max_abs() <= radius * (1.0 + 1e-9));
    }

    #[test]
    fn proportional_expected_queries_within_budget(seed in 0u64..5000, m_frac in 0.05f64..0.9) {
        let x = low_rank(20, 15, 2, seed);
        let m = m_frac * 300.0;
        let w = leverage_weight(&x, m).unwrap();
        prop_assert!((w.total() - m).abs() <= 1e-9 * m);
        let clamped: f64 = (0..20).map(|i| (0..15).map(|j| w.entry(i, j).min(1.0)).sum::<f64>()).sum();
        prop_assert!(clamped <= m * (1.0 + 1e-12));
    }
}

#[test]
fn truncation_keeps_requested_rank() {
    let (_, omega, w, y) = setup(3);
    let inv = w.inv_sqrt().unwrap();
    let a = inv.hadamard_dense(y.values()).unwrap();
    let x = truncated_svd(&a, 2).unwrap().reconstruct();
    let est = debiased_rank_projection(&y, &omega, &w, &EstimatorConfig::new(2)).unwrap();
    let back = w.sqrt().hadamard_dense(&est.m_hat).unwrap();
    let s = truncated_svd(&back, 3).unwrap().singular_values;
    assert!(s[2] <= 1e-10 * s[0]);
    assert!(back.sub(&x).unwrap().max_abs() <= 1e-10 * x.max_abs());
}
