//! Labeled samples and the pairwise label.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A sample `(X_i, Y_i)` of `n` points in `R^d` with labels in `1..=K`.
///
/// Features are stored row-major. Labels keep their 1-based form on the
/// public surface; `class_of` returns the 0-based class index used for
/// indexing `class_counts` and `class_index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    n_classes: usize,
    class_counts: Vec<usize>,
    class_index: Vec<Vec<usize>>,
}

impl LabeledDataset {
    /// Builds a dataset from row-major features. Every label must lie in `1..=n_classes`.
    pub fn new(features: Vec<f64>, dim: usize, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("feature dimension must be positive"));
        }
        if n_classes == 0 {
            return Err(invalid("number of classes must be positive"));
        }
        if features.len() != labels.len() * dim {
            return Err(invalid(format!(
                "feature buffer has {} values, expected {} rows x {} columns",
                features.len(),
                labels.len(),
                dim
            )));
        }
        if let Some(v) = features.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite feature value {v}")));
        }
        let mut class_index = vec![Vec::new(); n_classes];
        for (i, &y) in labels.iter().enumerate() {
            if y == 0 || y > n_classes {
                return Err(invalid(format!("label {y} at row {i} outside 1..={n_classes}")));
            }
            class_index[y - 1].push(i);
        }
        let class_counts = class_index.iter().map(Vec::len).collect();
        Ok(Self { features, dim, labels, n_classes, class_counts, class_index })
    }

    /// Builds a dataset from one slice per row; `n_classes` is the largest label.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or_else(|| invalid("no rows"))?;
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("rows have differing lengths"));
        }
        let n_classes = labels.iter().copied().max().unwrap_or(0);
        Self::new(rows.concat(), dim, labels, n_classes)
    }

    /// Scalar-feature dataset (`d = 1`).
    pub fn from_scalars(xs: Vec<f64>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        Self::new(xs, 1, labels, n_classes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// 1-based label of row `i`.
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// 0-based class of row `i`.
    pub fn class_of(&self, i: usize) -> usize {
        self.labels[i] - 1
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn class_index(&self) -> &[Vec<usize>] {
        &self.class_index
    }

    /// Pairwise label of `(i, j)`.
    pub fn pair_label(&self, i: usize, j: usize) -> PairLabel {
        PairLabel::from_labels(self.labels[i], self.labels[j])
    }

    /// Numbers of positive and negative pairs `(n_+, n_-)` among the `n(n-1)/2` pairs.
    pub fn pair_counts(&self) -> Result<(u64, u64)> {
        if self.len() < 2 {
            return Err(Error::EmptySample(self.len()));
        }
        Ok(self.pair_counts_unchecked())
    }

    pub(crate) fn pair_counts_unchecked(&self) -> (u64, u64) {
        let counts: Vec<u64> = self.class_counts.iter().map(|&c| c as u64).collect();
        let n_plus = counts.iter().map(|c| c * c.saturating_sub(1) / 2).sum();
        let total: u64 = counts.iter().sum();
        let n_minus = (total * total - counts.iter().map(|c| c * c).sum::<u64>()) / 2;
        (n_plus, n_minus)
    }

    /// Empirical class proportions `n_k / n`.
    pub fn class_proportions(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.class_counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Restriction to the first `n` rows, keeping the class count.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(invalid(format!("prefix of {n} rows from a sample of {}", self.len())));
        }
        Self::new(self.features[..n * self.dim].to_vec(), self.dim, self.labels[..n].to_vec(), self.n_classes)
    }

    /// Rows selected by `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(idx.len() * self.dim);
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            if i >= self.len() {
                return Err(invalid(format!("row {i} out of range")));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::new(features, self.dim, labels, self.n_classes)
    }
}

/// `Z = 2 * 1{Y = Y'} - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairLabel {
    Negative,
    Positive,
}

impl PairLabel {
    pub fn from_labels(y: usize, y_prime: usize) -> Self {
        if y == y_prime {
            PairLabel::Positive
        } else {
            PairLabel::Negative
        }
    }

    /// The `{-1, +1}` encoding.
    pub fn z(self) -> i8 {
        match self {
            PairLabel::Positive => 1,
            PairLabel::Negative => -1,
        }
    }

    pub fn from_z(z: i8) -> Result<Self> {
        match z {
            1 => Ok(PairLabel::Positive),
            -1 => Ok(PairLabel::Negative),
            other => Err(invalid(format!("pair label must be -1 or +1, got {other}"))),
        }
    }

    pub fn is_positive(self) -> bool {
        self == PairLabel::Positive
    }
}
