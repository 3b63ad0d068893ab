//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use rocsim::eval::rank_correlation;
use rocsim::harness::{
    run_experiment, run_fast_rates, run_mmc_subsample, DataSource, ExperimentConfig, ExperimentKind, FastRatesConfig,
    MmcSubsampleConfig, SphereRocConfig,
};
use rocsim::risk::{
    empirical_risks, negative_risk_complete, negative_risk_pair_sampled, negative_risk_tuple_sampled,
    variance_components,
};
use rocsim::rng::derive_seed;
use rocsim::solvers::{kkt_residuals, solve_bilinear_kkt, solve_threshold_scan, KktCase, MmcConfig};
use rocsim::synth::{
    check_quantile_condition, mu1_integral, sample_fast_rates, sample_mixture, FastRatesParams, MixtureParams,
};
use rocsim::{LabeledDataset, SimilarityModel};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn estimator_oracle() -> Result<String, String> {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = r.random_range(2..=200);
        let k = r.random_range(2..=5).min(n);
        let d = r.random_range(1..=4);
        let ds = random_dataset(&mut r, n, k, d);
        let model = if case % 2 == 0 {
            SimilarityModel::bilinear(random_symmetric(&mut r, d) * 0.5).unwrap()
        } else {
            let b = random_symmetric(&mut r, d);
            SimilarityModel::mahalanobis(&b * b.transpose()).unwrap()
        };
        let (rp, rm) = empirical_risks(&ds, &model).map_err(|e| e.to_string())?;
        let (op, om) = naive_risks(&ds, &model);
        worst = worst.max((rp.value - op).abs()).max((rm.value - om).abs());
    }
    ensure(worst <= 1e-12, format!("max deviation {worst:e} > 1e-12"))?;
    Ok(format!("max |estimate - double loop| = {worst:.1e} over 100 datasets"))
}

fn fixed_risk_problem() -> (LabeledDataset, SimilarityModel) {
    let params = MixtureParams { n_classes: 5, dim: 3, ..MixtureParams::default() };
    let ds = sample_mixture(&params, 200, 5).unwrap();
    let mut r = rng(6);
    let a = random_symmetric(&mut r, 3) * 0.2;
    (ds, SimilarityModel::bilinear(a).unwrap())
}

fn unbiasedness() -> Result<String, String> {
    let (ds, model) = fixed_risk_problem();
    let target = negative_risk_complete(&ds, &model).map_err(|e| e.to_string())?.value;
    let reps = 100_000u64;
    let budget = 10;
    let mut detail = Vec::new();
    for (name, tuple) in [("pair-sampled", false), ("tuple-sampled", true)] {
        let est: Vec<f64> = (0..reps)
            .map(|rep| {
                let seed = derive_seed(2024, &[tuple as u64, rep]);
                let e = if tuple {
                    negative_risk_tuple_sampled(&ds, &model, budget, seed)
                } else {
                    negative_risk_pair_sampled(&ds, &model, budget, seed)
                };
                e.unwrap().value
            })
            .collect();
        let (m, v) = mean_var(&est);
        let se = (v / reps as f64).sqrt();
        let z = (m - target) / se;
        ensure(z.abs() <= 3.0, format!("{name}: mean {m:.6} vs {target:.6}, z = {z:.2}"))?;
        detail.push(format!("{name} z = {z:+.2}"));
    }
    Ok(format!("{} (10^5 estimates each, B = {budget})", detail.join(", ")))
}

/// Scalar features `class + u`; pairs across classes 1 and 2 score high.
fn hot_pair_dataset() -> LabeledDataset {
    let mut r = rng(33);
    let k = 4;
    let n = 120;
    let labels: Vec<usize> = (0..n).map(|i| i % k + 1).collect();
    let xs: Vec<f64> = labels.iter().map(|&l| l as f64 + 0.5 * r.random::<f64>()).collect();
    LabeledDataset::from_scalars(xs, labels, k).unwrap()
}

fn hot_pair_score(x: &[f64], y: &[f64]) -> f64 {
    let (cx, cy) = (x[0].floor() as i64, y[0].floor() as i64);
    let jitter = 0.05 * (x[0].fract() + y[0].fract());
    if (cx == 1 && cy == 2) || (cx == 2 && cy == 1) {
        0.9 + jitter
    } else {
        0.1 + jitter
    }
}

fn variance_law() -> Result<String, String> {
    let (ds, model) = fixed_risk_problem();
    let target = negative_risk_complete(&ds, &model).map_err(|e| e.to_string())?.value;
    let budgets = [1u64, 2, 4, 8, 16, 32, 64];
    let reps = 4000u64;
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for &b in &budgets {
        let msd: f64 = (0..reps)
            .map(|rep| {
                let v = negative_risk_tuple_sampled(&ds, &model, b, derive_seed(77, &[b, rep])).unwrap().value;
                (v - target).powi(2)
            })
            .sum::<f64>()
            / reps as f64;
        lx.push((b as f64).ln());
        ly.push(msd.ln());
    }
    let slope = ols_slope(&lx, &ly);
    ensure((slope + 1.0).abs() <= 0.1, format!("log-log slope {slope:.3} not within -1 +/- 0.1"))?;

    let hot = hot_pair_dataset();
    let pairs_per_tuple = 6u64;
    let b0 = 60u64;
    let reps = 20_000u64;
    let pair_est: Vec<f64> = (0..reps)
        .map(|rep| negative_risk_pair_sampled(&hot, &hot_pair_score, b0, derive_seed(91, &[0, rep])).unwrap().value)
        .collect();
    let tuple_est: Vec<f64> = (0..reps)
        .map(|rep| {
            negative_risk_tuple_sampled(&hot, &hot_pair_score, b0 / pairs_per_tuple, derive_seed(91, &[1, rep]))
                .unwrap()
                .value
        })
        .collect();
    let (_, var_pair) = mean_var(&pair_est);
    let (_, var_tuple) = mean_var(&tuple_est);
    ensure(var_pair > var_tuple, format!("Var(pair) {var_pair:.3e} <= Var(tuple) {var_tuple:.3e}"))?;
    let comps = variance_components(&hot, &hot_pair_score, 20_000, 5).map_err(|e| e.to_string())?;
    ensure(comps.prefer_tuples(), "variance components do not prefer tuples on the hot-pair data")?;
    Ok(format!(
        "slope {slope:.3}; hot pair at B0 = {b0}: Var(pair) {var_pair:.2e} > Var(tuple) {var_tuple:.2e}"
    ))
}

fn kkt_correctness() -> Result<String, String> {
    let mut r = rng(404);
    let mut worst_res: f64 = 0.0;
    let mut worst_obj: f64 = 0.0;
    let mut cases = [0usize; 4];
    for _ in 0..1000 {
        let d = r.random_range(2..=4);
        let p = random_symmetric(&mut r, d);
        let mut n = random_symmetric(&mut r, d);
        n *= r.random_range(0.2..1.5) / n.norm();
        let lo = ((1.0 - n.norm()) / 2.0).max(0.0) + 0.02;
        let alpha = r.random_range(lo..0.98);
        let sol = solve_bilinear_kkt(&p, &n, alpha).map_err(|e| e.to_string())?;
        let res = kkt_residuals(&sol, &p, &n);
        ensure(res.within(1e-8, p.norm()), format!("residuals {res:?} at alpha {alpha}"))?;
        worst_res = worst_res
            .max(res.stationarity / p.norm().max(1.0))
            .max(res.feas_n)
            .max(res.feas_norm)
            .max(res.cs_lambda)
            .max(res.cs_gamma);
        let oracle = pga_bilinear(&p, &n, sol.beta, 20_000);
        let gap = (p.dot(&oracle) - sol.objective(&p)).abs();
        worst_obj = worst_obj.max(gap);
        ensure(gap <= 1e-4, format!("objective gap {gap:e} vs projected gradient (case {:?})", sol.case))?;
        cases[sol.case as usize] += 1;
    }

    let mut violations = 0;
    for _ in 0..50 {
        let p = random_symmetric(&mut r, 3);
        let mut n = random_symmetric(&mut r, 3);
        n *= 0.8 / n.norm();
        let lambdas: Vec<f64> = (0..20)
            .map(|i| 0.12 + 0.86 * i as f64 / 19.0)
            .filter_map(|alpha| solve_bilinear_kkt(&p, &n, alpha).ok())
            .filter(|s| s.case == KktCase::Boundary)
            .map(|s| s.lambda)
            .collect();
        violations += lambdas.windows(2).filter(|w| w[1] > w[0] + 1e-9).count();
    }
    ensure(violations == 0, format!("lambda increased with alpha {violations} times"))?;
    Ok(format!(
        "max residual {worst_res:.1e}, max objective gap {worst_obj:.1e}; cases zero-P/colinear/interior/boundary = {cases:?}"
    ))
}

fn threshold_exactness() -> Result<String, String> {
    let mut r = rng(505);
    for case in 0..100 {
        let a = r.random_range(0.1..0.9);
        let params = FastRatesParams::new(0.26, 0.35, a).unwrap();
        let n = r.random_range(4..=40);
        let ds = sample_fast_rates(&params, n, derive_seed(505, &[case])).unwrap();
        let (pos, neg) = ds.pair_counts().unwrap();
        if pos == 0 || neg == 0 {
            continue;
        }
        let alpha = r.random_range(0.0..1.0);
        let sol = solve_threshold_scan(&ds, alpha).map_err(|e| e.to_string())?;
        let (t, rp, rm) = brute_force_threshold(&ds, alpha);
        ensure(
            sol.t == t && sol.r_plus == rp && sol.r_minus == rm,
            format!("case {case}: scan ({}, {}, {}) vs brute force ({t}, {rp}, {rm})", sol.t, sol.r_plus, sol.r_minus),
        )?;
    }
    Ok("scan identical to brute force on 100 datasets".into())
}

fn construction_validity() -> Result<String, String> {
    let mut worst_q: f64 = 0.0;
    let mut worst_mu: f64 = 0.0;
    for k in 1..=9 {
        let a = k as f64 / 10.0;
        let params = FastRatesParams::new(0.26, 0.35, a).map_err(|e| e.to_string())?;
        let q = check_quantile_condition(&params).map_err(|e| e.to_string())?;
        let mu = (mu1_integral(&params).map_err(|e| e.to_string())? - 1.0).abs();
        ensure(q < 1e-3, format!("a = {a}: quantile residual {q:e}"))?;
        ensure(mu <= 1e-10, format!("a = {a}: |int mu_1 - 1| = {mu:e}"))?;
        worst_q = worst_q.max(q);
        worst_mu = worst_mu.max(mu);
    }
    Ok(format!("max quantile residual {worst_q:.1e}, max |int mu_1 - 1| {worst_mu:.1e}"))
}

fn fast_rates_config() -> FastRatesConfig {
    FastRatesConfig { repetitions: 200, noise_grid: vec![], ..FastRatesConfig::default() }
}

fn fast_rates_trend() -> Result<String, String> {
    let cfg = fast_rates_config();
    let out = run_fast_rates(&cfg, 1).map_err(|e| e.to_string())?;
    let a: Vec<f64> = out.fits.iter().map(|f| f.a).collect();
    let c: Vec<f64> = out.fits.iter().map(|f| f.exponent).collect();
    let c01 = c[0];
    let c09 = c[c.len() - 1];
    let rho = rank_correlation(&a, &c).map_err(|e| e.to_string())?;
    ensure(c09 < c01, format!("C_0.9 = {c09:.3} not below C_0.1 = {c01:.3}"))?;
    ensure(rho < 0.0, format!("rank correlation {rho:.3} not negative"))?;
    Ok(format!("C_0.1 = {c01:.3}, C_0.9 = {c09:.3}, Spearman(a, C_a) = {rho:.3} (200 repetitions)"))
}

fn neyman_pearson() -> Result<String, String> {
    let cfg = fast_rates_config();
    let out = run_fast_rates(&cfg, 1).map_err(|e| e.to_string())?;
    let feasible: Vec<_> = out.runs.iter().filter(|r| r.r_minus <= cfg.alpha).collect();
    let worst = feasible.iter().map(|r| r.regret).fold(f64::INFINITY, f64::min);
    ensure(!feasible.is_empty(), "no analytically feasible run")?;
    ensure(worst >= -1e-12, format!("regret {worst:e} below -1e-12"))?;
    Ok(format!("min regret {worst:.2e} over {} feasible of {} runs", feasible.len(), out.runs.len()))
}

fn mmc_subsampling() -> Result<String, String> {
    let cfg = MmcSubsampleConfig {
        data: DataSource::Mixture { params: MixtureParams::default(), test_n: 2000 },
        n_list: vec![2000],
        b_fractions: vec![0.15],
        include_full: true,
        runs_per_cell: 1,
        solver: MmcConfig::default(),
    };
    let out = run_mmc_subsample(&cfg, 9).map_err(|e| e.to_string())?;
    let sub = out.rows.iter().find(|r| r.budget != "full").ok_or("missing subsampled run")?;
    let full = out.rows.iter().find(|r| r.budget == "full").ok_or("missing full run")?;
    let gap = (full.test_objective - sub.test_objective).abs() / full.test_objective.abs();
    let frac = sub.pair_evals as f64 / full.pair_evals as f64;
    ensure(gap < 0.05, format!("test objective gap {:.2}%", 100.0 * gap))?;
    ensure(frac < 0.10, format!("pair evaluations ratio {frac:.4}"))?;
    Ok(format!(
        "test objective {:.4} (B = {}) vs {:.4} (full): gap {:.2}%, pair evaluations {:.3}% of full",
        sub.test_objective,
        sub.budget,
        full.test_objective,
        100.0 * gap,
        100.0 * frac
    ))
}

fn csv_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
        .collect()
}

fn determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = |kind, dir: &str, workers| ExperimentConfig {
        experiment: kind,
        seed: 42,
        output_dir: tmp.path().join(dir),
        workers: Some(workers),
        tolerance: Default::default(),
        sphere: Some(SphereRocConfig { n: 300, ..SphereRocConfig::default() }),
        fast_rates: Some(FastRatesConfig {
            a_list: vec![0.2, 0.8],
            repetitions: 20,
            noise_draws: 10_000,
            ..FastRatesConfig::default()
        }),
        mmc: Some(MmcSubsampleConfig {
            data: DataSource::Mixture { params: MixtureParams::default(), test_n: 300 },
            n_list: vec![300],
            runs_per_cell: 2,
            ..MmcSubsampleConfig::default()
        }),
    };
    let mut checked = 0;
    for kind in [ExperimentKind::SphereRoc, ExperimentKind::FastRates, ExperimentKind::MmcSubsample] {
        let mut outputs = Vec::new();
        for (run, workers) in [1, 1, 2].into_iter().enumerate() {
            let cfg = base(kind, &format!("{}-{run}", kind.as_str()), workers);
            run_experiment(&cfg).map_err(|e| e.to_string())?;
            outputs.push(csv_bytes(&cfg.output_dir));
        }
        ensure(!outputs[0].is_empty(), format!("{}: no CSV written", kind.as_str()))?;
        ensure(outputs[0] == outputs[1], format!("{}: re-run differs", kind.as_str()))?;
        ensure(outputs[0] == outputs[2], format!("{}: differs with 2 workers", kind.as_str()))?;
        checked += outputs[0].len();
    }
    Ok(format!("{checked} CSV files byte-identical across re-runs and worker counts"))
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, Duration, Check); 10] = [
        (1, "estimator oracle equivalence", Duration::from_secs(10), estimator_oracle),
        (2, "incomplete-estimator unbiasedness", Duration::from_secs(120), unbiasedness),
        (3, "variance law and tuple preference", Duration::from_secs(300), variance_law),
        (4, "KKT correctness", Duration::from_secs(60), kkt_correctness),
        (5, "threshold-scan exactness", Duration::from_secs(30), threshold_exactness),
        (6, "fast-rates construction validity", Duration::from_secs(60), construction_validity),
        (7, "fast-rates trend", Duration::from_secs(1800), fast_rates_trend),
        (8, "Neyman-Pearson sanity", Duration::MAX, neyman_pearson),
        (9, "MMC subsampling", Duration::from_secs(600), mmc_subsampling),
        (10, "determinism", Duration::MAX, determinism),
    ];
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let elapsed = started.elapsed();
        let result = match result {
            Ok(msg) if elapsed > budget => Err(format!("{msg}; took {:.1}s, budget {}s", elapsed.as_secs_f64(), budget.as_secs())),
            other => other,
        };
        match result {
            Ok(msg) => println!("criterion {id:>2} PASS  {name}: {msg} [{:.1}s]", elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {msg} [{:.1}s]", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
