use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Lower empirical quantile: the `ceil(q R)`-th order statistic (1-based) of `R` values.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("quantile of an empty sample"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid(format!("quantile level {q} outside (0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    let pos = q * r;
    // q R is often an integer up to rounding (0.7 * 10 = 7.000000000000001).
    let rounded = pos.round();
    let rank = if (pos - rounded).abs() <= 1e-9 * r { rounded } else { pos.ceil() };
    let idx = (rank as usize).clamp(1, sorted.len()) - 1;
    Ok(sorted[idx])
}

/// Least-squares fit `log q = exponent * log n + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_rate(ns: &[f64], quantiles: &[f64]) -> Result<RateFit> {
    if ns.len() != quantiles.len() {
        return Err(invalid("sample sizes and quantiles differ in length"));
    }
    if ns.len() < 2 {
        return Err(invalid("rate fit needs at least two points"));
    }
    if let Some(q) = quantiles.iter().find(|q| !(**q > 0.0)) {
        return Err(invalid(format!("cannot take the log of quantile {q}")));
    }
    if ns.iter().any(|n| !(*n > 0.0)) {
        return Err(invalid("sample sizes must be positive"));
    }
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = quantiles.iter().map(|q| q.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("rate fit needs at least two distinct sample sizes"));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(RateFit { exponent, intercept, r_squared })
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            out[o] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (average ranks for ties).
pub fn rank_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("rank correlation needs two equal-length samples of size >= 2"));
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let k = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / k, ry.iter().sum::<f64>() / k);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    if vx == 0.0 || vy == 0.0 {
        return Err(invalid("rank correlation of a constant sample"));
    }
    Ok(cov / (vx * vy).sqrt())
}
