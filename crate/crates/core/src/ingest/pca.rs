use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Principal subspace: `reduced = (x - mean) * components`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// `d x r`, orthonormal columns sorted by decreasing variance.
    pub components: DMatrix<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Covariance eigenvalues in decreasing order, kept and discarded.
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.ncols()
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(invalid(format!("PCA fitted on {} features, got {}", self.mean.len(), x.ncols())));
        }
        let mut centered = x.clone();
        for mut row in centered.row_iter_mut() {
            row -= self.mean.transpose();
        }
        Ok(centered * &self.components)
    }

    pub fn inverse_transform(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = z * self.components.transpose();
        for mut row in x.row_iter_mut() {
            row += self.mean.transpose();
        }
        x
    }
}

/// Fits PCA on the rows of `x` and keeps the smallest number of components
/// whose cumulative explained-variance ratio reaches `target_explained`.
pub fn pca_fit_transform(x: &DMatrix<f64>, target_explained: f64) -> Result<(PcaModel, DMatrix<f64>)> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::EmptySample(n));
    }
    if !(target_explained > 0.0 && target_explained <= 1.0) {
        return Err(invalid(format!("explained-variance target {target_explained} outside (0, 1]")));
    }
    let mean = x.row_mean().transpose();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::try_new(cov, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("covariance eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();

    let r = if total <= 0.0 {
        // constant data: every direction explains nothing, keep one
        1
    } else {
        // treat eigenvalues at round-off level as exact zeros
        let floor = total * 1e-12;
        let rank = eigenvalues.iter().filter(|&&l| l > floor).count().max(1);
        let mut cum = 0.0;
        let mut r = rank;
        for (k, l) in eigenvalues.iter().enumerate().take(rank) {
            cum += l / total;
            if cum >= target_explained * (1.0 - 1e-12) {
                r = k + 1;
                break;
            }
        }
        r
    };
    let components = DMatrix::from_fn(d, r, |i, j| eig.eigenvectors[(i, order[j])]);
    let explained_variance_ratio =
        eigenvalues[..r].iter().map(|l| if total > 0.0 { l / total } else { 0.0 }).collect();
    let reduced = &centered * &components;
    Ok((PcaModel { mean, components, explained_variance_ratio, eigenvalues }, reduced))
}

/// Images as rows of pixel intensities scaled to `[0, 1]`.
pub fn images_to_matrix(t: &super::IdxTensor, limit: Option<usize>) -> Result<DMatrix<f64>> {
    if t.dims.len() != 3 {
        return Err(invalid("expected an image tensor"));
    }
    let n = limit.map_or(t.len(), |l| l.min(t.len()));
    let s = t.item_size();
    Ok(DMatrix::from_fn(n, s, |i, j| t.data[i * s + j] as f64 / 255.0))
}
