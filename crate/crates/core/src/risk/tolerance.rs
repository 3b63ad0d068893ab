//! Constraint tolerances matching the uniform deviation bounds.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Constants entering the tolerance formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    /// VC dimension `V` of the model class, supplied per family.
    pub vc_dim: f64,
    /// `kappa` with `kappa <= sum_k p_k^2 <= 1 - kappa`.
    pub kappa: f64,
    /// Universal constant of the U-process bound. Not known numerically; defaults to 1.
    pub universal_c: f64,
    /// Confidence level `delta`.
    pub delta: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { vc_dim: 1.0, kappa: 0.1, universal_c: 1.0, delta: 0.1 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.vc_dim > 0.0) {
            return Err(invalid("VC dimension must be positive"));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(invalid("kappa must lie in (0, 1)"));
        }
        if !(self.universal_c > 0.0) {
            return Err(invalid("universal constant must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid("delta must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Whether `kappa <= sum_k p_k^2 <= 1 - kappa` holds for the given class proportions.
    /// A violation is logged; the formulas are still evaluated.
    pub fn check_class_balance(&self, proportions: &[f64]) -> bool {
        let s: f64 = proportions.iter().map(|p| p * p).sum();
        let ok = self.kappa <= s && s <= 1.0 - self.kappa;
        if !ok {
            log::warn!("sum of squared class proportions {s:.4} outside [kappa, 1 - kappa] for kappa = {}", self.kappa);
        }
        ok
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }
}

/// `2 C / kappa * sqrt(V / n) + 2 / kappa * (1 + 1 / kappa) * sqrt(log(3 / delta) / (n - 1))`.
pub fn tolerance_slow(n: u64, cfg: &ToleranceConfig) -> Result<f64> {
    if n <= 1 {
        return Err(invalid("tolerance needs n > 1"));
    }
    cfg.validate()?;
    let n = n as f64;
    let inv_k = 1.0 / cfg.kappa;
    Ok(2.0 * cfg.universal_c * inv_k * (cfg.vc_dim / n).sqrt()
        + 2.0 * inv_k * (1.0 + inv_k) * ((3.0 / cfg.delta).ln() / (n - 1.0)).sqrt())
}

/// Tolerance for the tuple-sampled problem with `budget` tuples:
/// `4 sqrt(V log(1+N)/N) + sqrt(log(2/delta)/N) + sqrt(2 (V log(1 + prod n_k) + log(4/delta)) / B)`
/// with `N = min_k n_k`.
pub fn tolerance_incomplete(class_counts: &[usize], budget: u64, cfg: &ToleranceConfig) -> Result<f64> {
    let terms = tolerance_incomplete_terms(class_counts, budget, cfg)?;
    Ok(terms.iter().sum())
}

/// The three terms of [`tolerance_incomplete`], in order.
pub fn tolerance_incomplete_terms(class_counts: &[usize], budget: u64, cfg: &ToleranceConfig) -> Result<[f64; 3]> {
    if class_counts.is_empty() {
        return Err(invalid("no classes"));
    }
    if let Some(k) = class_counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(k + 1));
    }
    if budget == 0 {
        return Err(invalid("budget must be at least 1"));
    }
    cfg.validate()?;
    let v = cfg.vc_dim;
    let n_min = *class_counts.iter().min().unwrap() as f64;
    // log(1 + prod n_k) without forming the product.
    let log_prod: f64 = class_counts.iter().map(|&c| (c as f64).ln()).sum();
    let log1p_prod = log_prod + (-log_prod).exp().ln_1p();
    let b = budget as f64;
    Ok([
        4.0 * (v * n_min.ln_1p() / n_min).sqrt(),
        ((2.0 / cfg.delta).ln() / n_min).sqrt(),
        (2.0 * (v * log1p_prod + (4.0 / cfg.delta).ln()) / b).sqrt(),
    ])
}
