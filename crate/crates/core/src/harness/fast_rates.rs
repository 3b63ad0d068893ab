use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::eval::{empirical_quantile, fit_rate, RateFit};
use crate::rng::{derive_seed, hash_str};
use crate::solvers::solve_threshold_scan;
use crate::synth::{analytic_risks_threshold, noise_distribution, optimal_threshold, sample_fast_rates, FastRatesParams};

use super::config::FastRatesConfig;

/// One solved problem. `r_plus`/`r_minus` are the true risks of the learned set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FastRatesRun {
    pub a: f64,
    pub n: usize,
    pub repetition: usize,
    pub t: f64,
    pub empirical_r_plus: f64,
    pub empirical_r_minus: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    pub regret: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFitRow {
    pub a: f64,
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileRow {
    pub a: f64,
    pub n: usize,
    pub quantile: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseRow {
    pub a: f64,
    pub t: f64,
    pub probability: f64,
}

/// Per-`a` constants of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FastRatesSetting {
    pub params: FastRatesParams,
    pub t_star: f64,
    pub roc_star: f64,
}

#[derive(Debug, Clone)]
pub struct FastRatesOutcome {
    pub settings: Vec<FastRatesSetting>,
    /// Ordered by `(a, repetition, n)` as listed in the config.
    pub runs: Vec<FastRatesRun>,
    pub quantiles: Vec<QuantileRow>,
    pub fits: Vec<RateFitRow>,
    pub noise: Vec<NoiseRow>,
}

/// Seed of the sample shared by all `n` of one `(a, repetition)` cell.
pub fn fast_rates_seed(seed: u64, a: f64, repetition: usize) -> u64 {
    derive_seed(seed, &[hash_str("fast-rates"), a.to_bits(), repetition as u64])
}

/// Runs every `(a, repetition)` cell on the current rayon pool.
///
/// Each cell draws `max(n_list)` points once and solves the empirical problem
/// (with zero tolerance) on each leading subsample of size `n`.
pub fn run_fast_rates(cfg: &FastRatesConfig, seed: u64) -> Result<FastRatesOutcome> {
    let settings = cfg
        .a_list
        .iter()
        .map(|&a| {
            let params = FastRatesParams::new(cfg.alpha, cfg.m, a)?;
            let (t_star, roc_star) = optimal_threshold(&params)?;
            Ok(FastRatesSetting { params, t_star, roc_star })
        })
        .collect::<Result<Vec<_>>>()?;
    let n_max = *cfg.n_list.iter().max().expect("validated");

    let cells: Vec<(usize, usize)> =
        (0..settings.len()).flat_map(|k| (0..cfg.repetitions).map(move |r| (k, r))).collect();
    let per_cell = cells
        .par_iter()
        .map(|&(k, rep)| {
            let s = &settings[k];
            let sample = sample_fast_rates(&s.params, n_max, fast_rates_seed(seed, s.params.a, rep))?;
            cfg.n_list
                .iter()
                .map(|&n| {
                    let ds = sample.prefix(n)?;
                    let sol = solve_threshold_scan(&ds, cfg.alpha)?;
                    let (r_plus, r_minus) = analytic_risks_threshold(sol.t, &s.params)?;
                    Ok(FastRatesRun {
                        a: s.params.a,
                        n,
                        repetition: rep,
                        t: sol.t,
                        empirical_r_plus: sol.r_plus,
                        empirical_r_minus: sol.r_minus,
                        r_plus,
                        r_minus,
                        regret: s.roc_star - r_plus,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Vec<Result<Vec<_>>>>();
    let mut runs = Vec::with_capacity(cells.len() * cfg.n_list.len());
    for cell in per_cell {
        runs.extend(cell?);
    }

    let mut quantiles = Vec::new();
    let mut fits = Vec::new();
    for s in &settings {
        let a = s.params.a;
        let mut qs = Vec::with_capacity(cfg.n_list.len());
        for &n in &cfg.n_list {
            let regrets: Vec<f64> = runs.iter().filter(|r| r.a == a && r.n == n).map(|r| r.regret).collect();
            let q = empirical_quantile(&regrets, cfg.quantile)?;
            quantiles.push(QuantileRow { a, n, quantile: q });
            qs.push(q);
        }
        let ns: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
        let RateFit { exponent, intercept, r_squared } = fit_rate(&ns, &qs)?;
        fits.push(RateFitRow { a, exponent, intercept, r2: r_squared });
    }

    let noise = if cfg.noise_grid.is_empty() {
        Vec::new()
    } else {
        let per_a = settings
            .par_iter()
            .map(|s| {
                let nseed = derive_seed(seed, &[hash_str("fast-rates/noise"), s.params.a.to_bits()]);
                noise_distribution(&s.params, &cfg.noise_grid, cfg.noise_draws, nseed).map(|rows| {
                    rows.into_iter().map(|(t, p)| NoiseRow { a: s.params.a, t, probability: p }).collect::<Vec<_>>()
                })
            })
            .collect::<Vec<Result<Vec<_>>>>();
        let mut noise = Vec::new();
        for rows in per_a {
            noise.extend(rows?);
        }
        noise
    };

    Ok(FastRatesOutcome { settings, runs, quantiles, fits, noise })
}
