mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rocsim::model::mahalanobis_sq;
use rocsim::solvers::{
    compute_p_n, kkt_residuals, min_eigenvalue, mmc_objective, mmc_projected_gradient, positive_scatter,
    psd_project, solve_bilinear_kkt, solve_threshold_scan, KktCase, MmcConfig,
};
use rocsim::synth::{sample_fast_rates, sample_mixture, FastRatesParams, MixtureParams};

fn outer(x: &[f64], y: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), x.len(), |r, c| x[r] * y[c])
}

#[test]
fn p_and_n_match_pair_sums() {
    let mut r = rng(1);
    for _ in 0..20 {
        let n = r.random_range(6..40);
        let ds = random_dataset(&mut r, n, 3, 3);
        let (p, nn) = compute_p_n(&ds).unwrap();
        let (mut pb, mut nb) = (DMatrix::zeros(3, 3), DMatrix::zeros(3, 3));
        let (mut np, mut nm) = (0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let sym = outer(ds.row(i), ds.row(j)) + outer(ds.row(j), ds.row(i));
                if ds.label(i) == ds.label(j) {
                    pb += sym;
                    np += 1.0;
                } else {
                    nb += sym;
                    nm += 1.0;
                }
            }
        }
        assert!((p - pb / (2.0 * np)).amax() < 1e-12);
        assert!((nn - nb / (2.0 * nm)).amax() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kkt_solution_matches_projected_gradient(seed in any::<u64>(), d in 1usize..5, scale in 0.05f64..2.0, u in 0.0f64..1.0) {
        let mut r = rng(seed);
        let p = random_symmetric(&mut r, d);
        let mut n = random_symmetric(&mut r, d);
        prop_assume!(n.norm() > 1e-6);
        n *= scale / n.norm();
        let lo = ((1.0 - n.norm()) / 2.0).max(0.0) + 0.01;
        prop_assume!(lo < 0.99);
        let alpha = lo + u * (0.99 - lo);
        let sol = solve_bilinear_kkt(&p, &n, alpha).unwrap();
        let res = kkt_residuals(&sol, &p, &n);
        prop_assert!(res.within(1e-8, p.norm()), "{:?}", res);
        let oracle = pga_bilinear(&p, &n, sol.beta, 20_000);
        prop_assert!((p.dot(&oracle) - sol.objective(&p)).abs() <= 1e-6);
    }

    #[test]
    fn threshold_scan_matches_brute_force(seed in any::<u64>(), n in 3usize..30, a in 0.1f64..0.9, alpha in 0.0f64..1.0) {
        let params = FastRatesParams::new(0.26, 0.35, a).unwrap();
        let ds = sample_fast_rates(&params, n, seed).unwrap();
        let (pos, neg) = ds.pair_counts().unwrap();
        prop_assume!(pos > 0 && neg > 0);
        let sol = solve_threshold_scan(&ds, alpha).unwrap();
        let (t, rp, rm) = brute_force_threshold(&ds, alpha);
        prop_assert_eq!((sol.t, sol.r_plus, sol.r_minus), (t, rp, rm));
        prop_assert!(sol.r_minus <= alpha);
    }

    #[test]
    fn psd_projection_is_nearest_psd_matrix(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let m = random_symmetric(&mut r, d) * 3.0;
        let proj = psd_project(&m).unwrap();
        prop_assert!(min_eigenvalue(&proj) >= -1e-10);
        for _ in 0..20 {
            let v = DMatrix::from_fn(d, 1, |_, _| r.random::<f64>() - 0.5);
            prop_assert!((v.transpose() * &proj * &v)[(0, 0)] >= -1e-10);
            let b = DMatrix::from_fn(d, d, |_, _| r.random::<f64>() - 0.5);
            let other = &b * b.transpose();
            prop_assert!((&m - &proj).norm() <= (&m - other).norm() + 1e-12);
        }
        prop_assert!((psd_project(&proj).unwrap() - &proj).amax() < 1e-10);
    }

    #[test]
    fn mahalanobis_scales_linearly(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut r = rng(seed);
        let b = random_symmetric(&mut r, 3);
        let a = &b * b.transpose();
        let x: Vec<f64> = (0..3).map(|_| r.random()).collect();
        let y: Vec<f64> = (0..3).map(|_| r.random()).collect();
        let lhs = mahalanobis_sq(&(&a * c), &x, &y);
        let rhs = c * mahalanobis_sq(&a, &x, &y);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }
}

#[test]
fn lambda_decreases_along_the_boundary_branch() {
    let mut r = rng(77);
    let p = random_symmetric(&mut r, 3);
    let mut n = random_symmetric(&mut r, 3);
    n *= 0.7 / n.norm();
    let mut last = f64::INFINITY;
    let mut seen = 0;
    for i in 0..200 {
        let alpha = 0.16 + 0.83 * i as f64 / 199.0;
        let sol = solve_bilinear_kkt(&p, &n, alpha).unwrap();
        if sol.case == KktCase::Boundary {
            assert!(sol.lambda <= last + 1e-12);
            last = sol.lambda;
            seen += 1;
        }
    }
    assert!(seen > 10);
}

#[test]
fn mmc_iterates_stay_feasible_and_improve() {
    let params = MixtureParams { n_classes: 3, dim: 3, ..MixtureParams::default() };
    let ds = sample_mixture(&params, 150, 2).unwrap();
    let res = mmc_projected_gradient(&ds, &MmcConfig::default()).unwrap();
    assert!(res.constraint <= 1.0 + 1e-9);
    assert!(min_eigenvalue(&res.a) >= -1e-10);
    assert!(res.trace.windows(2).all(|w| w[1].objective >= w[0].objective));
    assert!(res.trace.last().unwrap().objective > res.trace[0].objective * 1.05);
    let (obj, con) = mmc_objective(&ds, &res.a).unwrap();
    assert!((obj - res.objective).abs() < 1e-10);
    assert!((con - positive_scatter(&ds).unwrap().dot(&res.a)).abs() < 1e-12);

    // Zero metric: constraint trivially satisfied.
    let (obj0, con0) = mmc_objective(&ds, &DMatrix::zeros(3, 3)).unwrap();
    assert_eq!((obj0, con0), (0.0, 0.0));
}

#[test]
fn mmc_with_tuples_is_reproducible() {
    let ds = sample_mixture(&MixtureParams::default(), 200, 3).unwrap();
    let cfg = MmcConfig { tuple_budget: Some(30), seed: 5, ..MmcConfig::default() };
    let a = mmc_projected_gradient(&ds, &cfg).unwrap();
    let b = mmc_projected_gradient(&ds, &cfg).unwrap();
    assert_eq!(a.a, b.a);
    assert_eq!(a.pair_evaluations_per_iter, 30 * 10);
}
