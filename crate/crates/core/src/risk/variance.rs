//! Variance diagnostics for choosing between the two sampling schemes.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{invalid, Result};
use crate::model::Similarity;
use crate::rng;

use super::estimators::{draw_tuple, require_nonempty_classes, tuple_weights, weighted_tuple_score, NegativePairSampler};

/// Sample variances of the tuple kernel and of a negative-pair score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponents {
    /// `Var(h_S(X^(1), ..., X^(K)))`.
    pub var_tuple_kernel: f64,
    /// `Var(S(X, X') | Y != Y')`.
    pub var_negative_pair: f64,
    pub n_classes: usize,
}

impl VarianceComponents {
    /// Leading excess variance of the tuple-sampled estimate over the complete
    /// one for a budget of `pairs` sampled pairs.
    pub fn tuple_excess(&self, pairs: f64) -> f64 {
        let k = self.n_classes as f64;
        k * (k - 1.0) / (2.0 * pairs) * self.var_tuple_kernel
    }

    /// Same for the pair-sampled estimate.
    pub fn pair_excess(&self, pairs: f64) -> f64 {
        self.var_negative_pair / pairs
    }

    pub fn prefer_tuples(&self) -> bool {
        self.tuple_excess(1.0) < self.pair_excess(1.0)
    }
}

pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Monte-Carlo estimates from `n_mc` resampled tuples and `n_mc` resampled negative pairs.
pub fn variance_components<S: Similarity + ?Sized>(
    ds: &LabeledDataset,
    model: &S,
    n_mc: usize,
    seed: u64,
) -> Result<VarianceComponents> {
    if n_mc < 2 {
        return Err(invalid("need at least two Monte-Carlo draws"));
    }
    require_nonempty_classes(ds)?;
    model.check_dim(ds.dim())?;
    let weights = tuple_weights(ds.class_counts())?;
    let mut rng = rng::stream(seed);

    let mut tuple = Vec::with_capacity(ds.n_classes());
    let kernels: Vec<f64> = (0..n_mc)
        .map(|_| {
            draw_tuple(ds, &mut rng, &mut tuple);
            let rows: Vec<&[f64]> = tuple.iter().map(|&i| ds.row(i)).collect();
            weighted_tuple_score(&rows, model, &weights)
        })
        .collect();

    let sampler = NegativePairSampler::new(ds)?;
    let pairs: Vec<f64> = (0..n_mc)
        .map(|_| {
            let (i, j) = sampler.draw(ds, &mut rng);
            model.similarity(ds.row(i), ds.row(j))
        })
        .collect();

    Ok(VarianceComponents {
        var_tuple_kernel: sample_variance(&kernels),
        var_negative_pair: sample_variance(&pairs),
        n_classes: ds.n_classes(),
    })
}
