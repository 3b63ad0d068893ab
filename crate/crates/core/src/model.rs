//! Similarity and distance model families.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Anything that scores a pair of feature vectors.
///
/// Estimators are generic over this trait so that ad-hoc closures (constant
/// scores, lookup tables) can be plugged in next to the model families.
pub trait Similarity {
    fn similarity(&self, x: &[f64], x_prime: &[f64]) -> f64;

    /// Checks that the scorer accepts `dim`-dimensional inputs.
    fn check_dim(&self, _dim: usize) -> Result<()> {
        Ok(())
    }
}

impl<F> Similarity for F
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    fn similarity(&self, x: &[f64], x_prime: &[f64]) -> f64 {
        self(x, x_prime)
    }
}

/// The three families used throughout: bilinear similarities, indicators of
/// the corner sets `S_t` on `[0,1]`, and Mahalanobis distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SimilarityModel {
    /// `S_A(x, x') = (1 + x^T A x') / 2`.
    Bilinear { a: DMatrix<f64> },
    /// `1{ min(max(1-x, 1-x'), max(x, x')) < t }` on scalar inputs.
    ThresholdIndicator { t: f64 },
    /// `d_A(x, x') = sqrt((x - x')^T A (x - x'))`.
    MahalanobisDistance { a: DMatrix<f64> },
}

impl SimilarityModel {
    pub fn bilinear(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(invalid("bilinear matrix must be square"));
        }
        Ok(SimilarityModel::Bilinear { a })
    }

    pub fn threshold(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("threshold {t} outside [0, 1]")));
        }
        Ok(SimilarityModel::ThresholdIndicator { t })
    }

    /// Validates symmetry and numerical positive semidefiniteness.
    pub fn mahalanobis(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(invalid("Mahalanobis matrix must be square"));
        }
        let scale = a.amax().max(1.0);
        if (&a - a.transpose()).amax() > 1e-10 * scale {
            return Err(invalid("Mahalanobis matrix is not symmetric"));
        }
        let min_eig = SymmetricEigen::new(a.clone()).eigenvalues.min();
        if min_eig < -PSD_TOLERANCE {
            return Err(invalid(format!("Mahalanobis matrix has eigenvalue {min_eig:e} < 0")));
        }
        Ok(SimilarityModel::MahalanobisDistance { a })
    }

    /// Input dimension expected by the model.
    pub fn dim(&self) -> usize {
        match self {
            SimilarityModel::Bilinear { a } | SimilarityModel::MahalanobisDistance { a } => a.nrows(),
            SimilarityModel::ThresholdIndicator { .. } => 1,
        }
    }

    /// Scores a pair after checking dimensions and, for the indicator family, the domain.
    pub fn score(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d || x_prime.len() != d {
            return Err(invalid(format!(
                "model expects {d}-vectors, got {} and {}",
                x.len(),
                x_prime.len()
            )));
        }
        if let SimilarityModel::ThresholdIndicator { .. } = self {
            if !(0.0..=1.0).contains(&x[0]) || !(0.0..=1.0).contains(&x_prime[0]) {
                return Err(invalid("indicator family is defined on [0, 1]"));
            }
        }
        Ok(self.similarity(x, x_prime))
    }
}

impl Similarity for SimilarityModel {
    fn similarity(&self, x: &[f64], x_prime: &[f64]) -> f64 {
        match self {
            SimilarityModel::Bilinear { a } => 0.5 * (1.0 + bilinear_form(a, x, x_prime)),
            SimilarityModel::ThresholdIndicator { t } => {
                if pair_statistic(x[0], x_prime[0]) < *t {
                    1.0
                } else {
                    0.0
                }
            }
            SimilarityModel::MahalanobisDistance { a } => mahalanobis_sq(a, x, x_prime).max(0.0).sqrt(),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(invalid(format!("model expects {}-vectors, data has dimension {dim}", self.dim())));
        }
        Ok(())
    }
}

/// `x^T A y`.
pub fn bilinear_form(a: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let d = x.len();
    let mut acc = 0.0;
    for i in 0..d {
        let mut row = 0.0;
        for j in 0..d {
            row += a[(i, j)] * y[j];
        }
        acc += x[i] * row;
    }
    acc
}

/// `(x - y)^T A (x - y)`.
pub fn mahalanobis_sq(a: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(y).map(|(u, v)| u - v).collect();
    bilinear_form(a, &diff, &diff)
}

/// `min(max(1-x, 1-x'), max(x, x'))`: the sup-distance from `(x, x')` to the
/// nearer of the corners `(0,0)` and `(1,1)`. The pair lies in `S_t` iff this is `< t`.
pub fn pair_statistic(x: f64, x_prime: f64) -> f64 {
    (1.0 - x).max(1.0 - x_prime).min(x.max(x_prime))
}
