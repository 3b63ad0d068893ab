//! Experiment runner: configuration, seeded worker pool, CSV and JSON artifacts.
//!
//! Every run writes its tables plus `metadata.json` into `output_dir`. CSV
//! contents depend only on the configuration; timings go to the metadata.

mod config;
mod fast_rates;
mod mmc_subsample;
mod sphere_roc;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{invalid, Result};
use crate::risk::{tolerance_incomplete, tolerance_slow, ToleranceConfig};

pub use config::{
    DataSource, ExperimentConfig, ExperimentKind, FastRatesConfig, MmcSubsampleConfig, SphereRocConfig,
};
pub use fast_rates::{
    fast_rates_seed, run_fast_rates, FastRatesOutcome, FastRatesRun, FastRatesSetting, NoiseRow, QuantileRow,
    RateFitRow,
};
pub use mmc_subsample::{budgets, run_mmc_subsample, Budget, MmcCellTiming, MmcOutcome, MmcRow};
pub use sphere_roc::{pair_scores, run_sphere_roc, SphereOutcome, SphereSolutionRow};

pub const METADATA_FILE: &str = "metadata.json";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    /// Files written, metadata last.
    pub files: Vec<PathBuf>,
    pub metadata: Value,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        self.files.push(path.clone());
        Ok(path)
    }
}

/// Tolerances at confidence `delta / 2`, the level at which the constraint slack enters.
fn tolerance_entry(tol: &ToleranceConfig, n: usize, budget: Option<(u64, &[usize])>) -> Result<Value> {
    let half = tol.with_delta(tol.delta / 2.0);
    let slow = tolerance_slow(n as u64, &half)?;
    let incomplete = match budget {
        Some((b, counts)) => Some(tolerance_incomplete(counts, b, &half)?),
        None => None,
    };
    Ok(json!({ "n": n, "B": budget.map(|b| b.0), "delta": half.delta, "tolerance_slow": slow, "tolerance_incomplete": incomplete }))
}

fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| invalid(format!("cannot start worker pool: {e}")))
}

/// Validates `config`, runs the experiment and writes its artifacts.
///
/// On failure a `metadata.json` with `"status": "failed"` lists whatever was
/// written before the error, and the error is returned.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let mut out = Writer { dir: config.output_dir.clone(), files: Vec::new() };
    let started = Instant::now();
    let pool = build_pool(config.workers)?;
    let result = pool.install(|| run_into(config, &mut out));
    let mut meta = json!({
        "experiment": config.experiment.as_str(),
        "seed": config.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "workers": pool.current_num_threads(),
        "config": config,
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    let map = meta.as_object_mut().expect("object");
    match result {
        Ok(extra) => {
            map.insert("status".into(), json!("ok"));
            for (k, v) in extra {
                map.insert(k, v);
            }
            map.insert("files".into(), json!(file_names(&out.files)));
            out.json(METADATA_FILE, &meta)?;
            Ok(RunSummary { output_dir: out.dir, files: out.files, metadata: meta })
        }
        Err(e) => {
            map.insert("status".into(), json!("failed"));
            map.insert("error".into(), json!(e.to_string()));
            map.insert("partial_files".into(), json!(file_names(&out.files)));
            if let Err(write_err) = out.json(METADATA_FILE, &meta) {
                log::error!("could not write failure metadata: {write_err}");
            }
            Err(e)
        }
    }
}

fn file_names(files: &[PathBuf]) -> Vec<String> {
    files.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect()
}

fn run_into(config: &ExperimentConfig, out: &mut Writer) -> Result<serde_json::Map<String, Value>> {
    let mut meta = serde_json::Map::new();
    match config.experiment {
        ExperimentKind::SphereRoc => {
            let cfg = config.sphere_block();
            let res = run_sphere_roc(&cfg, config.seed)?;
            #[derive(Serialize)]
            struct RocRow {
                alpha: f64,
                fpr: f64,
                tpr: f64,
            }
            let roc: Vec<RocRow> = res
                .curves
                .iter()
                .flat_map(|(alpha, c)| {
                    c.resample(cfg.roc_points).into_iter().map(move |(fpr, tpr)| RocRow { alpha: *alpha, fpr, tpr })
                })
                .collect();
            out.csv("solutions.csv", &res.solutions)?;
            out.csv("roc.csv", &roc)?;
            meta.insert("seeds".into(), json!({ "train": res.train_seed, "test": res.test_seed }));
            meta.insert("n_norm_frobenius".into(), json!(res.n_minus_norm));
            meta.insert(
                "lowest_feasible_alpha".into(),
                json!((1.0 - res.n_minus_norm) / 2.0),
            );
            meta.insert("tolerance".into(), json!([tolerance_entry(&config.tolerance, cfg.n, None)?]));
            meta.insert(
                "decisions".into(),
                json!({
                    "cap_density": "uniform on the cap with respect to surface measure",
                    "evaluation_sample": "fresh held-out sample, same size as training unless eval_n is set",
                    "degenerate_solutions": "minimum-norm matrix when P is zero or a positive multiple of N",
                    "infeasible_alpha": "recorded with case 'infeasible' and no ROC curve",
                    "roc_curve": "swept over all distinct test scores; roc.csv reads it at roc_points evenly spaced FPR values, taking the top of vertical jumps",
                }),
            );
        }
        ExperimentKind::FastRates => {
            let cfg = config.fast_rates_block();
            let res = run_fast_rates(&cfg, config.seed)?;
            #[derive(Serialize)]
            struct RegretRow {
                a: f64,
                n: usize,
                repetition: usize,
                regret: f64,
            }
            let regrets: Vec<RegretRow> = res
                .runs
                .iter()
                .map(|r| RegretRow { a: r.a, n: r.n, repetition: r.repetition, regret: r.regret })
                .collect();
            out.csv("regrets.csv", &regrets)?;
            out.csv("fits.csv", &res.fits)?;
            out.csv("quantiles.csv", &res.quantiles)?;
            out.csv("runs.csv", &res.runs)?;
            if !res.noise.is_empty() {
                out.csv("noise.csv", &res.noise)?;
            }
            let seeds: serde_json::Map<String, Value> = cfg
                .a_list
                .iter()
                .map(|&a| {
                    let s: Vec<u64> = (0..cfg.repetitions).map(|r| fast_rates_seed(config.seed, a, r)).collect();
                    (format!("{a}"), json!(s))
                })
                .collect();
            meta.insert("seeds".into(), Value::Object(seeds));
            meta.insert("settings".into(), json!(res.settings));
            let tol = cfg
                .n_list
                .iter()
                .map(|&n| tolerance_entry(&config.tolerance, n, None))
                .collect::<Result<Vec<_>>>()?;
            meta.insert("tolerance".into(), json!(tol));
            meta.insert(
                "decisions".into(),
                json!({
                    "constraint_slack": "empirical problem solved with zero tolerance",
                    "sampling": "one sample of size max(n_list) per (a, repetition); each n uses its leading n points",
                    "seed_rule": "seed xor hash(\"fast-rates\", a, repetition)",
                    "threshold_ties": "smallest threshold among maximizers",
                    "rate_fit": "least squares of log quantile on log n",
                    "quantile": "lower empirical quantile, order statistic ceil(q R)",
                }),
            );
        }
        ExperimentKind::MmcSubsample => {
            let cfg = config.mmc_block();
            let res = run_mmc_subsample(&cfg, config.seed)?;
            out.csv("results.csv", &res.rows)?;
            meta.insert("timings".into(), json!(res.timings));
            meta.insert("dim".into(), json!(res.dim));
            let tol = res
                .class_counts
                .iter()
                .map(|(n, b, counts)| {
                    let budget = b.0.map(|v| (v, counts.as_slice()));
                    tolerance_entry(&config.tolerance, *n, budget)
                })
                .collect::<Result<Vec<_>>>()?;
            meta.insert("tolerance".into(), json!(tol));
            meta.insert(
                "decisions".into(),
                json!({
                    "seed_rule": "train: seed xor hash(\"mmc-subsample\", \"train\", n, run); test: (\"test\", run); tuples: (\"tuples\", n, run, B)",
                    "runs_vary": "both the training subsample and the tuple draw change with the run index",
                    "budget": "B counts K-tuples; each tuple contributes K(K-1)/2 pairs",
                    "initialization": "A0 = I / trace(M+)",
                    "step": "relative step step_size * ||A||_F along the normalized gradient, halved until the objective does not decrease",
                    "projection": "alternate rescaling A / g when the constraint value g exceeds 1 with PSD clipping",
                    "stopping": "relative objective gain below tol, or max_iters",
                    "wall_time": "reported in metadata timings, not in results.csv",
                }),
            );
        }
    }
    Ok(meta)
}

/// Reads `metadata.json` from a finished run.
pub fn read_metadata(dir: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&std::fs::read_to_string(dir.join(METADATA_FILE))?)?)
}
