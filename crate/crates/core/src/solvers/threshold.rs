//! Exact empirical solution over the corner-set family `{S_t : t in [0, 1]}`.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{invalid, Error, Result};
use crate::model::pair_statistic;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSolution {
    pub t: f64,
    /// Empirical positive risk `R^+_n(S_t)`.
    pub r_plus: f64,
    /// Empirical negative risk `R^-_n(S_t)`.
    pub r_minus: f64,
    /// Positive and negative pairs inside `S_t`.
    pub positives_in: u64,
    pub negatives_in: u64,
    /// Set when only the empty set is feasible.
    pub degenerate: bool,
}

/// Pair statistics and pairwise labels for all `i < j`, sorted by statistic.
pub fn sorted_pair_statistics(ds: &LabeledDataset) -> Vec<(f64, bool)> {
    let n = ds.len();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        let xi = ds.row(i)[0];
        for j in i + 1..n {
            pairs.push((pair_statistic(xi, ds.row(j)[0]), ds.label(i) == ds.label(j)));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Maximizes `R^+_n(S_t)` subject to `R^-_n(S_t) <= alpha` in `O(n^2 log n)`.
///
/// Candidates are `t = 0`, the midpoints between consecutive sorted pair
/// statistics (with `0` and `1` as sentinels below and above), and `t = 1`.
/// Among optimal candidates the smallest `t` is returned.
pub fn solve_threshold_scan(ds: &LabeledDataset, alpha: f64) -> Result<ThresholdSolution> {
    if ds.dim() != 1 {
        return Err(invalid("threshold scan needs scalar features"));
    }
    if ds.features().iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(invalid("threshold scan needs features in [0, 1]"));
    }
    let (n_plus, n_minus) = ds.pair_counts()?;
    if n_plus == 0 {
        return Err(Error::NoPositivePairs);
    }
    if n_minus == 0 {
        return Err(Error::NoNegativePairs);
    }
    let sorted = sorted_pair_statistics(ds);
    let feasible = |neg: u64| neg as f64 / n_minus as f64 <= alpha;

    // The empty set (t = 0) dominates every other candidate that selects nothing.
    let (mut best_t, mut best_pos, mut best_neg) = (0.0, 0u64, 0u64);
    let (mut pos, mut neg) = (0u64, 0u64);
    for k in 0..sorted.len() {
        let (s, positive) = sorted[k];
        if positive {
            pos += 1;
        } else {
            neg += 1;
        }
        let next = sorted.get(k + 1).map_or(1.0, |p| p.0);
        if !(s < next) {
            continue;
        }
        let t = 0.5 * (s + next);
        // A midpoint that rounds onto `s` selects a prefix already seen with a smaller t.
        if !(s < t) {
            continue;
        }
        if pos > best_pos && feasible(neg) {
            best_t = t;
            best_pos = pos;
            best_neg = neg;
        }
    }
    Ok(ThresholdSolution {
        t: best_t,
        r_plus: best_pos as f64 / n_plus as f64,
        r_minus: best_neg as f64 / n_minus as f64,
        positives_in: best_pos,
        negatives_in: best_neg,
        degenerate: best_pos == 0,
    })
}
