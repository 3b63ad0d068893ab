use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::LabeledDataset;
use crate::error::{invalid, Result};
use crate::ingest::{images_to_matrix, pca_fit_transform, read_idx, IdxTensor};
use crate::rng::{self, derive_seed, hash_str};
use crate::solvers::{mmc_objective, mmc_projected_gradient, MmcConfig};
use crate::synth::sample_mixture;

use super::config::{DataSource, MmcSubsampleConfig};

/// Tuple budget of one run; `None` means all negative pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub Option<u64>);

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            Some(b) => write!(f, "{b}"),
            None => f.write_str("full"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmcRow {
    pub n: usize,
    #[serde(rename = "B")]
    pub budget: String,
    pub run: usize,
    pub test_objective: f64,
    pub test_constraint: f64,
    pub train_objective: f64,
    pub iterations: usize,
    pub pair_evals: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MmcCellTiming {
    pub n: usize,
    #[serde(rename = "B")]
    pub budget: String,
    pub run: usize,
    pub wall_time_s: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct MmcOutcome {
    pub rows: Vec<MmcRow>,
    pub timings: Vec<MmcCellTiming>,
    /// `(n, B, class counts)` of each training subsample, for the tolerance report.
    pub class_counts: Vec<(usize, Budget, Vec<usize>)>,
    /// Feature dimension after any PCA reduction.
    pub dim: usize,
}

/// Budgets in run order: the listed fractions of `n`, then the full problem.
pub fn budgets(cfg: &MmcSubsampleConfig, n: usize) -> Vec<Budget> {
    let mut out: Vec<Budget> =
        cfg.b_fractions.iter().map(|f| Budget(Some(((f * n as f64).round() as u64).max(1)))).collect();
    if cfg.include_full {
        out.push(Budget(None));
    }
    out
}

enum Pool {
    Mixture { test_n: usize, params: crate::synth::MixtureParams },
    Idx { train: LabeledDataset, test: LabeledDataset },
}

fn labels_of(t: &IdxTensor, limit: usize) -> Vec<usize> {
    t.data[..limit].iter().map(|&l| l as usize + 1).collect()
}

fn matrix_dataset(x: &DMatrix<f64>, labels: Vec<usize>, n_classes: usize) -> Result<LabeledDataset> {
    let (n, d) = x.shape();
    let mut features = Vec::with_capacity(n * d);
    for i in 0..n {
        features.extend(x.row(i).iter());
    }
    LabeledDataset::new(features, d, labels, n_classes)
}

fn load_idx_pool(
    train_images: &std::path::Path,
    train_labels: &std::path::Path,
    test_images: &std::path::Path,
    test_labels: &std::path::Path,
    pca_target: f64,
    test_limit: Option<usize>,
) -> Result<Pool> {
    let (ti, tl) = (read_idx(train_images)?, read_idx(train_labels)?);
    let (vi, vl) = (read_idx(test_images)?, read_idx(test_labels)?);
    if ti.len() != tl.len() || vi.len() != vl.len() {
        return Err(invalid("image and label files disagree in length"));
    }
    let n_classes = tl.data.iter().chain(&vl.data).copied().max().unwrap_or(0) as usize + 1;
    let x_train = images_to_matrix(&ti, None)?;
    let (pca, reduced) = pca_fit_transform(&x_train, pca_target)?;
    log::info!("pca: {} -> {} components", x_train.ncols(), pca.n_components());
    let x_test = pca.transform(&images_to_matrix(&vi, test_limit)?)?;
    let n_test = x_test.nrows();
    Ok(Pool::Idx {
        train: matrix_dataset(&reduced, labels_of(&tl, tl.len()), n_classes)?,
        test: matrix_dataset(&x_test, labels_of(&vl, n_test), n_classes)?,
    })
}

/// Runs every `(n, run, budget)` cell on the current rayon pool.
///
/// Within one `(n, run)` all budgets share the same training subsample and
/// test set; both change from run to run.
pub fn run_mmc_subsample(cfg: &MmcSubsampleConfig, seed: u64) -> Result<MmcOutcome> {
    let pool = match &cfg.data {
        DataSource::Mixture { params, test_n } => Pool::Mixture { test_n: *test_n, params: params.clone() },
        DataSource::Idx { train_images, train_labels, test_images, test_labels, pca_target, test_limit } => {
            load_idx_pool(train_images, train_labels, test_images, test_labels, *pca_target, *test_limit)?
        }
    };
    let tag = hash_str("mmc-subsample");
    let data_for = |n: usize, run: usize| -> Result<(LabeledDataset, LabeledDataset)> {
        let split_seed = derive_seed(seed, &[tag, hash_str("train"), n as u64, run as u64]);
        match &pool {
            Pool::Mixture { test_n, params } => {
                let test_seed = derive_seed(seed, &[tag, hash_str("test"), run as u64]);
                Ok((sample_mixture(params, n, split_seed)?, sample_mixture(params, *test_n, test_seed)?))
            }
            Pool::Idx { train, test } => {
                if n > train.len() {
                    return Err(invalid(format!("n = {n} exceeds the {} training images", train.len())));
                }
                let mut idx: Vec<usize> = (0..train.len()).collect();
                idx.shuffle(&mut rng::stream(split_seed));
                idx.truncate(n);
                idx.sort_unstable();
                Ok((train.select(&idx)?, test.clone()))
            }
        }
    };

    let mut cells = Vec::new();
    for &n in &cfg.n_list {
        for run in 0..cfg.runs_per_cell {
            for b in budgets(cfg, n) {
                cells.push((n, run, b));
            }
        }
    }
    let results = cells
        .par_iter()
        .map(|&(n, run, budget)| -> Result<_> {
            let (train, test) = data_for(n, run)?;
            let solver = MmcConfig {
                tuple_budget: budget.0,
                seed: derive_seed(seed, &[tag, hash_str("tuples"), n as u64, run as u64, budget.0.unwrap_or(0)]),
                ..cfg.solver.clone()
            };
            let started = Instant::now();
            let res = mmc_projected_gradient(&train, &solver)?;
            let wall = started.elapsed().as_secs_f64();
            let (test_obj, test_con) = mmc_objective(&test, &res.a)?;
            let row = MmcRow {
                n,
                budget: budget.to_string(),
                run,
                test_objective: test_obj,
                test_constraint: test_con,
                train_objective: res.objective,
                iterations: res.iterations,
                pair_evals: res.pair_evaluations_per_iter,
            };
            let timing =
                MmcCellTiming { n, budget: budget.to_string(), run, wall_time_s: wall, converged: res.converged };
            Ok((row, timing, train.class_counts().to_vec(), train.dim()))
        })
        .collect::<Vec<_>>();

    let mut out = MmcOutcome { rows: Vec::new(), timings: Vec::new(), class_counts: Vec::new(), dim: 0 };
    for (r, &(n, _, b)) in results.into_iter().zip(&cells) {
        let (row, timing, counts, dim) = r?;
        if row.run == 0 {
            out.class_counts.push((n, b, counts));
        }
        out.dim = dim;
        out.rows.push(row);
        out.timings.push(timing);
    }
    Ok(out)
}
