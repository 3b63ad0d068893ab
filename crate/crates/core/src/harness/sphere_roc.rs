use serde::Serialize;

use crate::dataset::PairLabel;
use crate::error::{Error, Result};
use crate::eval::{empirical_roc, RocCurve};
use crate::model::SimilarityModel;
use crate::risk::empirical_risks;
use crate::rng::{derive_seed, hash_str};
use crate::solvers::{compute_p_n, solve_bilinear_kkt};
use crate::synth::sample_sphere;
use crate::LabeledDataset;

use super::config::SphereRocConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSolutionRow {
    pub alpha: f64,
    /// KKT branch, or `infeasible` when no bilinear similarity meets the level.
    pub case: String,
    pub lambda: f64,
    pub gamma: f64,
    pub train_r_plus: f64,
    pub train_r_minus: f64,
    pub test_auc: f64,
}

#[derive(Debug, Clone)]
pub struct SphereOutcome {
    pub train_seed: u64,
    pub test_seed: u64,
    pub n_minus_norm: f64,
    pub solutions: Vec<SphereSolutionRow>,
    /// Test curves for the feasible levels, keyed by `alpha`.
    pub curves: Vec<(f64, RocCurve)>,
}

/// Scores and pair labels of all pairs `i < j`.
pub fn pair_scores(ds: &LabeledDataset, model: &SimilarityModel) -> (Vec<f64>, Vec<PairLabel>) {
    use crate::model::Similarity;
    let n = ds.len();
    let mut scores = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut labels = Vec::with_capacity(scores.capacity());
    for i in 0..n {
        for j in i + 1..n {
            scores.push(model.similarity(ds.row(i), ds.row(j)));
            labels.push(ds.pair_label(i, j));
        }
    }
    (scores, labels)
}

pub fn run_sphere_roc(cfg: &SphereRocConfig, seed: u64) -> Result<SphereOutcome> {
    let tag = hash_str("sphere-roc");
    let train_seed = derive_seed(seed, &[tag, 0]);
    let test_seed = derive_seed(seed, &[tag, 1]);
    let train = sample_sphere(&cfg.data, cfg.n, train_seed)?;
    let test = sample_sphere(&cfg.data, cfg.eval_n.unwrap_or(cfg.n), test_seed)?;
    let (p, n) = compute_p_n(&train)?;

    let mut solutions = Vec::new();
    let mut curves = Vec::new();
    for &alpha in &cfg.alphas {
        match solve_bilinear_kkt(&p, &n, alpha) {
            Ok(sol) => {
                let model = SimilarityModel::bilinear(sol.a.clone())?;
                let (rp, rm) = empirical_risks(&train, &model)?;
                let (scores, labels) = pair_scores(&test, &model);
                let curve = empirical_roc(&scores, &labels)?;
                solutions.push(SphereSolutionRow {
                    alpha,
                    case: sol.case.as_str().to_string(),
                    lambda: sol.lambda,
                    gamma: sol.gamma,
                    train_r_plus: rp.value,
                    train_r_minus: rm.value,
                    test_auc: curve.area(),
                });
                curves.push((alpha, curve));
            }
            Err(Error::Infeasible { beta, bound }) => {
                log::warn!("sphere-roc: alpha = {alpha} infeasible (beta = {beta:.4} < {bound:.4})");
                solutions.push(SphereSolutionRow {
                    alpha,
                    case: "infeasible".into(),
                    lambda: f64::NAN,
                    gamma: f64::NAN,
                    train_r_plus: f64::NAN,
                    train_r_minus: f64::NAN,
                    test_auc: f64::NAN,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SphereOutcome { train_seed, test_seed, n_minus_norm: n.norm(), solutions, curves })
}
