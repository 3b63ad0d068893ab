//! Complete and incomplete U-statistic estimates of the pairwise risks.

use rand::distr::{Distribution, Uniform, weighted::WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{invalid, Error, Result};
use crate::model::Similarity;
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    CompletePositive,
    CompleteNegative,
    PairSampled,
    TupleSampled,
}

/// A risk value and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub scheme: Scheme,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    pub pairs_used: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Sums of `S(X_i, X_j)` over positive and negative pairs `i < j`.
///
/// Each row's contribution is accumulated separately and the row sums are
/// added in index order, so the result does not depend on anything but the inputs.
fn pair_sums<S: Similarity + ?Sized>(ds: &LabeledDataset, model: &S) -> (f64, f64) {
    let (mut pos, mut neg) = (0.0, 0.0);
    for i in 0..ds.len() {
        let (mut row_pos, mut row_neg) = (0.0, 0.0);
        let xi = ds.row(i);
        let yi = ds.label(i);
        for j in i + 1..ds.len() {
            let s = model.similarity(xi, ds.row(j));
            if ds.label(j) == yi {
                row_pos += s;
            } else {
                row_neg += s;
            }
        }
        pos += row_pos;
        neg += row_neg;
    }
    (pos, neg)
}

/// `(R^+_n(S), R^-_n(S))` in one pass over the pairs.
pub fn empirical_risks<S: Similarity + ?Sized>(ds: &LabeledDataset, model: &S) -> Result<(RiskEstimate, RiskEstimate)> {
    let (n_plus, n_minus) = ds.pair_counts()?;
    if n_plus == 0 {
        return Err(Error::NoPositivePairs);
    }
    if n_minus == 0 {
        return Err(Error::NoNegativePairs);
    }
    model.check_dim(ds.dim())?;
    let (pos, neg) = pair_sums(ds, model);
    Ok((complete(Scheme::CompletePositive, pos, n_plus), complete(Scheme::CompleteNegative, neg, n_minus)))
}

fn complete(scheme: Scheme, sum: f64, pairs: u64) -> RiskEstimate {
    RiskEstimate { scheme, value: sum / pairs as f64, budget: None, pairs_used: pairs, seed: None }
}

/// Average score over all positive pairs.
pub fn positive_risk_complete<S: Similarity + ?Sized>(ds: &LabeledDataset, model: &S) -> Result<RiskEstimate> {
    let (n_plus, _) = ds.pair_counts()?;
    if n_plus == 0 {
        return Err(Error::NoPositivePairs);
    }
    model.check_dim(ds.dim())?;
    let (pos, _) = pair_sums(ds, model);
    Ok(complete(Scheme::CompletePositive, pos, n_plus))
}

/// Average score over all negative pairs.
pub fn negative_risk_complete<S: Similarity + ?Sized>(ds: &LabeledDataset, model: &S) -> Result<RiskEstimate> {
    let (_, n_minus) = ds.pair_counts()?;
    if n_minus == 0 {
        return Err(Error::NoNegativePairs);
    }
    model.check_dim(ds.dim())?;
    let (_, neg) = pair_sums(ds, model);
    Ok(complete(Scheme::CompleteNegative, neg, n_minus))
}

/// Uniform draws from the set of negative pairs without materializing it:
/// a class pair `(k, l)` is drawn with probability `n_k n_l / n_-`, then one
/// member of each class uniformly.
#[derive(Debug, Clone)]
pub struct NegativePairSampler {
    class_pairs: Vec<(usize, usize)>,
    pick: WeightedIndex<u64>,
}

impl NegativePairSampler {
    pub fn new(ds: &LabeledDataset) -> Result<Self> {
        let counts = ds.class_counts();
        let mut class_pairs = Vec::new();
        let mut weights = Vec::new();
        for k in 0..counts.len() {
            for l in k + 1..counts.len() {
                let w = counts[k] as u64 * counts[l] as u64;
                if w > 0 {
                    class_pairs.push((k, l));
                    weights.push(w);
                }
            }
        }
        if weights.is_empty() {
            return Err(Error::NoNegativePairs);
        }
        let pick = WeightedIndex::new(&weights).map_err(|e| invalid(e.to_string()))?;
        Ok(Self { class_pairs, pick })
    }

    /// Row indices `(i, j)` of one negative pair.
    pub fn draw(&self, ds: &LabeledDataset, rng: &mut Stream) -> (usize, usize) {
        let (k, l) = self.class_pairs[self.pick.sample(rng)];
        let idx = ds.class_index();
        let i = idx[k][rng.random_range(0..idx[k].len())];
        let j = idx[l][rng.random_range(0..idx[l].len())];
        (i, j)
    }
}

/// `R-bar^-_B`: mean score of `budget` negative pairs drawn with replacement.
pub fn negative_risk_pair_sampled<S: Similarity + ?Sized>(
    ds: &LabeledDataset,
    model: &S,
    budget: u64,
    seed: u64,
) -> Result<RiskEstimate> {
    if budget == 0 {
        return Err(invalid("pair budget must be at least 1"));
    }
    model.check_dim(ds.dim())?;
    let sampler = NegativePairSampler::new(ds)?;
    let mut rng = rng::stream(seed);
    let mut sum = 0.0;
    for _ in 0..budget {
        let (i, j) = sampler.draw(ds, &mut rng);
        sum += model.similarity(ds.row(i), ds.row(j));
    }
    Ok(RiskEstimate {
        scheme: Scheme::PairSampled,
        value: sum / budget as f64,
        budget: Some(budget),
        pairs_used: budget,
        seed: Some(seed),
    })
}

/// Weights `n_k n_l / n_-` of the class pairs `k < l`, row-major over `(k, l)`.
pub fn tuple_weights(class_counts: &[usize]) -> Result<Vec<f64>> {
    let k = class_counts.len();
    let n: f64 = class_counts.iter().map(|&c| c as f64).sum();
    let n_minus = (n * n - class_counts.iter().map(|&c| (c * c) as f64).sum::<f64>()) / 2.0;
    if n_minus <= 0.0 {
        return Err(Error::NoNegativePairs);
    }
    let mut w = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            w.push(class_counts[a] as f64 * class_counts[b] as f64 / n_minus);
        }
    }
    Ok(w)
}

/// `h_S(x_1, ..., x_K) = (1/n_-) sum_{k<l} n_k n_l S(x_k, x_l)` for one representative per class.
pub fn tuple_kernel<S: Similarity + ?Sized>(xs: &[&[f64]], model: &S, class_counts: &[usize]) -> Result<f64> {
    if xs.len() != class_counts.len() {
        return Err(invalid(format!("tuple has {} members for {} classes", xs.len(), class_counts.len())));
    }
    if xs.len() < 2 {
        return Err(invalid("tuple kernel needs at least two classes"));
    }
    let weights = tuple_weights(class_counts)?;
    Ok(weighted_tuple_score(xs, model, &weights))
}

pub(crate) fn weighted_tuple_score<S: Similarity + ?Sized>(xs: &[&[f64]], model: &S, weights: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut w = weights.iter();
    for a in 0..xs.len() {
        for b in a + 1..xs.len() {
            acc += w.next().unwrap() * model.similarity(xs[a], xs[b]);
        }
    }
    acc
}

/// Draws one row index per class, uniformly within each class.
pub(crate) fn draw_tuple(ds: &LabeledDataset, rng: &mut Stream, out: &mut Vec<usize>) {
    out.clear();
    for members in ds.class_index() {
        let pick = Uniform::new(0, members.len()).expect("class checked nonempty");
        out.push(members[pick.sample(rng)]);
    }
}

pub(crate) fn require_nonempty_classes(ds: &LabeledDataset) -> Result<()> {
    if let Some(k) = ds.class_counts().iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(k + 1));
    }
    if ds.n_classes() < 2 {
        return Err(Error::NoNegativePairs);
    }
    Ok(())
}

/// `R-tilde^-_B`: mean tuple kernel over `budget` K-tuples drawn with replacement.
pub fn negative_risk_tuple_sampled<S: Similarity + ?Sized>(
    ds: &LabeledDataset,
    model: &S,
    budget: u64,
    seed: u64,
) -> Result<RiskEstimate> {
    if budget == 0 {
        return Err(invalid("tuple budget must be at least 1"));
    }
    require_nonempty_classes(ds)?;
    model.check_dim(ds.dim())?;
    let weights = tuple_weights(ds.class_counts())?;
    let mut rng = rng::stream(seed);
    let mut tuple = Vec::with_capacity(ds.n_classes());
    let mut sum = 0.0;
    for _ in 0..budget {
        draw_tuple(ds, &mut rng, &mut tuple);
        let rows: Vec<&[f64]> = tuple.iter().map(|&i| ds.row(i)).collect();
        sum += weighted_tuple_score(&rows, model, &weights);
    }
    let k = ds.n_classes() as u64;
    Ok(RiskEstimate {
        scheme: Scheme::TupleSampled,
        value: sum / budget as f64,
        budget: Some(budget),
        pairs_used: budget * k * (k - 1) / 2,
        seed: Some(seed),
    })
}
