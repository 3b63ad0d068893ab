use serde::{Deserialize, Serialize};

use crate::dataset::PairLabel;
use crate::error::{invalid, Result};

/// Empirical ROC curve: the points `(F_-(t), F_+(t))` of the survival
/// functions `F_+/-(t) = P(score > t | Z = +/-1)`, swept over every distinct
/// score, joined by line segments.
///
/// Points are strictly increasing in `(fpr, tpr)` lexicographic order; runs
/// of equal `fpr` are vertical jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

pub fn empirical_roc(scores: &[f64], labels: &[PairLabel]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(invalid(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(invalid("NaN score"));
    }
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(invalid("ROC curve needs both positive and negative pairs"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]].is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(RocCurve { points })
}

/// Same as [`empirical_roc`] with `{-1, +1}` labels.
pub fn empirical_roc_z(scores: &[f64], z: &[i8]) -> Result<RocCurve> {
    let labels = z.iter().map(|&v| PairLabel::from_z(v)).collect::<Result<Vec<_>>>()?;
    empirical_roc(scores, &labels)
}

impl RocCurve {
    /// `ROC(alpha)`: the curve read at false positive rate `alpha`, taking the
    /// top of a vertical jump located exactly at `alpha`.
    pub fn roc_at(&self, alpha: f64) -> f64 {
        let alpha = alpha.clamp(0.0, 1.0);
        let idx = self.points.partition_point(|p| p.0 <= alpha).max(1) - 1;
        let (f0, t0) = self.points[idx];
        if f0 == alpha || idx + 1 == self.points.len() {
            return t0;
        }
        let (f1, t1) = self.points[idx + 1];
        t0 + (t1 - t0) * (alpha - f0) / (f1 - f0)
    }

    /// The curve read at `k >= 2` evenly spaced false positive rates in `[0, 1]`.
    pub fn resample(&self, k: usize) -> Vec<(f64, f64)> {
        let k = k.max(2);
        (0..k)
            .map(|i| {
                let f = i as f64 / (k - 1) as f64;
                (f, self.roc_at(f))
            })
            .collect()
    }

    /// Area under the piecewise-linear curve.
    pub fn area(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["fpr", "tpr"])?;
        for (f, t) in &self.points {
            w.write_record([f.to_string(), t.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Free-function form of [`RocCurve::roc_at`].
pub fn roc_at(curve: &RocCurve, alpha: f64) -> f64 {
    curve.roc_at(alpha)
}
