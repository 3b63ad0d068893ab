//! Gaussian class mixtures with anisotropic noise, used for the metric-learning runs.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{invalid, Result};
use crate::rng;

/// `K` balanced classes in `R^d`. Class means are drawn once from
/// `N(0, separation^2 I)` using `mean_seed`; within-class noise has standard
/// deviations spread geometrically from `noise_min` to `noise_max` across
/// coordinates, so that Euclidean distance is dominated by uninformative directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixtureParams {
    pub n_classes: usize,
    pub dim: usize,
    pub separation: f64,
    pub noise_min: f64,
    pub noise_max: f64,
    pub mean_seed: u64,
}

impl Default for MixtureParams {
    fn default() -> Self {
        Self { n_classes: 5, dim: 5, separation: 1.5, noise_min: 0.3, noise_max: 3.0, mean_seed: 17 }
    }
}

impl MixtureParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 || self.dim == 0 {
            return Err(invalid("mixture needs at least two classes and one dimension"));
        }
        if !(self.noise_min > 0.0 && self.noise_max >= self.noise_min && self.separation >= 0.0) {
            return Err(invalid("mixture scales must be positive and ordered"));
        }
        Ok(())
    }

    pub fn means(&self) -> Vec<Vec<f64>> {
        let mut rng = rng::stream(self.mean_seed);
        (0..self.n_classes)
            .map(|_| (0..self.dim).map(|_| self.separation * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect()
    }

    pub fn noise_scales(&self) -> Vec<f64> {
        if self.dim == 1 {
            return vec![self.noise_min];
        }
        let ratio = (self.noise_max / self.noise_min).ln();
        (0..self.dim)
            .map(|j| self.noise_min * (ratio * j as f64 / (self.dim - 1) as f64).exp())
            .collect()
    }
}

/// `n` points with labels cycling through the classes in random order.
pub fn sample_mixture(params: &MixtureParams, n: usize, seed: u64) -> Result<LabeledDataset> {
    params.validate()?;
    let means = params.means();
    let scales = params.noise_scales();
    let mut rng = rng::stream(seed);
    let mut features = Vec::with_capacity(n * params.dim);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.random_range(0..params.n_classes);
        for j in 0..params.dim {
            let z: f64 = rng.sample(StandardNormal);
            features.push(means[k][j] + scales[j] * z);
        }
        labels.push(k + 1);
    }
    LabeledDataset::new(features, params.dim, labels, params.n_classes)
}
