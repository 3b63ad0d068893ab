//! Two-class problem on `[0, 1]` with a controllable noise exponent.
//!
//! `X` is uniform, `p_1 = p_2 = 1/2`, and the class-1 density is
//!
//! ```text
//! mu_1(x) = 2C                          on [0, m]
//!         = 1 - |2x - 1|^((1-a)/a)      on (m, 1/2]
//!         = 2 - mu_1(1 - x)             on (1/2, 1]
//! ```
//!
//! so the pairwise posterior is `eta(x, x') = 1/2 + g(x) g(x') / 2` with
//! `g = mu_1 - 1`. `g < 0` on `[0, 1/2)` and `g > 0` on `(1/2, 1]`, hence
//! `{eta > 1/2}` is the pair of corner squares `S_{1/2}`, and `C` is chosen
//! so that this set has negative risk exactly `alpha`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{invalid, Error, Result};
use crate::rng;

use super::quad;

pub use crate::model::pair_statistic;

/// The optimal decision threshold on `eta`, fixed by construction.
pub const Q_STAR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastRatesParams {
    pub alpha: f64,
    pub m: f64,
    pub a: f64,
    pub c: f64,
    pub q_star: f64,
}

impl FastRatesParams {
    /// Derives `C` from `(alpha, m, a)`.
    pub fn new(alpha: f64, m: f64, a: f64) -> Result<Self> {
        let c = fast_rates_c(alpha, m, a)?;
        Ok(Self { alpha, m, a, c, q_star: Q_STAR })
    }

    /// Exponent `(1 - a) / a` of the curved part.
    fn exponent(&self) -> f64 {
        (1.0 - self.a) / self.a
    }

    /// `g(x) = mu_1(x) - 1` for `x` in `[0, 1]`.
    pub fn g(&self, x: f64) -> f64 {
        if x > 0.5 {
            return -self.g(1.0 - x);
        }
        if x <= self.m {
            2.0 * self.c - 1.0
        } else {
            -(1.0 - 2.0 * x).powf(self.exponent())
        }
    }

    /// `G(x) = int_0^x g(u) du`. On `[0, 1/2]`:
    /// `(2C - 1) x` on the plateau, then
    /// `(2C - 1) m - (a/2) ((1 - 2m)^(1/a) - (1 - 2x)^(1/a))`.
    /// Point symmetry of `g` about `1/2` gives `G(x) = G(1 - x)` beyond.
    pub fn antiderivative(&self, x: f64) -> f64 {
        if x > 0.5 {
            return self.antiderivative(1.0 - x);
        }
        let plateau = 2.0 * self.c - 1.0;
        if x <= self.m {
            plateau * x
        } else {
            let inv_a = 1.0 / self.a;
            plateau * self.m - 0.5 * self.a * ((1.0 - 2.0 * self.m).powf(inv_a) - (1.0 - 2.0 * x).powf(inv_a))
        }
    }

    pub fn eta(&self, x: f64, x_prime: f64) -> f64 {
        0.5 + 0.5 * self.g(x) * self.g(x_prime)
    }

    /// Non-smooth points of `mu_1`.
    pub fn breakpoints(&self) -> [f64; 3] {
        [self.m, 0.5, 1.0 - self.m]
    }
}

/// `C = 1/2 - sqrt(1 - 2 alpha) / (4m) + a (1 - 2m)^(1/a) / (4m)`, required to lie in `(0, 1/2)`.
pub fn fast_rates_c(alpha: f64, m: f64, a: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1/2)")));
    }
    if !(m > 0.0 && m < 0.5) {
        return Err(Error::Domain(format!("m = {m} must lie in (0, 1/2)")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("a = {a} must lie in (0, 1)")));
    }
    let c = 0.5 - (1.0 - 2.0 * alpha).sqrt() / (4.0 * m) + a * (1.0 - 2.0 * m).powf(1.0 / a) / (4.0 * m);
    if !(c > 0.0 && c < 0.5) {
        return Err(Error::Domain(format!("(alpha, m, a) = ({alpha}, {m}, {a}) gives C = {c} outside (0, 1/2)")));
    }
    Ok(c)
}

fn check_unit(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("{x} outside [0, 1]")));
    }
    Ok(())
}

/// Class-1 density `mu_1(x)`.
pub fn mu1(x: f64, params: &FastRatesParams) -> Result<f64> {
    check_unit(x)?;
    Ok(1.0 + params.g(x))
}

/// Pairwise posterior `eta(x, x') = 1/2 + (mu_1(x) - 1)(mu_1(x') - 1)/2`.
pub fn eta_pair(x: f64, x_prime: f64, params: &FastRatesParams) -> Result<f64> {
    check_unit(x)?;
    check_unit(x_prime)?;
    Ok(params.eta(x, x_prime))
}

/// `n` draws: `X ~ U[0, 1]`, `P(Y = 1 | X = x) = mu_1(x) / 2`.
pub fn sample_fast_rates(params: &FastRatesParams, n: usize, seed: u64) -> Result<LabeledDataset> {
    let mut rng = rng::stream(seed);
    let mut xs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.random();
        let p1 = 0.5 * (1.0 + params.g(x));
        labels.push(if rng.random::<f64>() < p1 { 1 } else { 2 });
        xs.push(x);
    }
    LabeledDataset::from_scalars(xs, labels, 2)
}

/// Lebesgue measure of `S_t = [0, t]^2 U [1 - t, 1]^2`.
pub fn corner_set_area(t: f64) -> f64 {
    let overlap = (2.0 * t - 1.0).max(0.0);
    2.0 * t * t - overlap * overlap
}

/// True risks `(R^+(S_t), R^-(S_t)) = lambda(S_t) +/- int_{S_t} g(x) g(x') dx dx'`.
pub fn analytic_risks_threshold(t: f64, params: &FastRatesParams) -> Result<(f64, f64)> {
    check_unit(t)?;
    let big_g = |x: f64| params.antiderivative(x);
    let low = big_g(t);
    let high = big_g(1.0) - big_g(1.0 - t);
    let mut cross = low * low + high * high;
    if t > 0.5 {
        let mid = big_g(t) - big_g(1.0 - t);
        cross -= mid * mid;
    }
    let area = corner_set_area(t);
    Ok(((area + cross).clamp(0.0, 1.0), (area - cross).clamp(0.0, 1.0)))
}

/// Largest `t` with `R^-(S_t) <= alpha` and its true positive rate, i.e. the
/// optimal point `ROC*(alpha)` within the family (found by bisection).
pub fn optimal_threshold(params: &FastRatesParams) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if analytic_risks_threshold(mid, params)?.1 <= params.alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, analytic_risks_threshold(lo, params)?.0))
}

/// `|int_{eta > 1/2} (1 - eta) - alpha/2|` by adaptive 2-D quadrature.
pub fn check_quantile_condition(params: &FastRatesParams) -> Result<f64> {
    // eta > 1/2 iff g(x) g(y) > 0; testing eta itself loses the sign once the product drops below an ulp of 1/2.
    let integrand = |x: f64, y: f64| {
        let prod = params.g(x) * params.g(y);
        if prod > 0.0 {
            0.5 - 0.5 * prod
        } else {
            0.0
        }
    };
    let value = quad::integrate_square(integrand, 0.0, 1.0, &params.breakpoints(), 1e-10)?;
    Ok((value - params.alpha / 2.0).abs())
}

/// `int_0^1 mu_1` by adaptive quadrature.
pub fn mu1_integral(params: &FastRatesParams) -> Result<f64> {
    quad::integrate(|x| 1.0 + params.g(x), 0.0, 1.0, &params.breakpoints(), 1e-12)
}

/// Monte-Carlo estimate of `P(|eta(X, X') - Q*| <= t)` for each `t` in the grid.
pub fn noise_distribution(params: &FastRatesParams, t_grid: &[f64], n_mc: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if let Some(t) = t_grid.iter().find(|t| !(0.0..=0.5).contains(*t)) {
        return Err(invalid(format!("noise level {t} outside [0, 1/2]")));
    }
    if n_mc == 0 {
        return Err(invalid("need at least one Monte-Carlo draw"));
    }
    let mut rng = rng::stream(seed);
    let mut gaps: Vec<f64> = (0..n_mc)
        .map(|_| {
            let (x, y): (f64, f64) = (rng.random(), rng.random());
            (params.eta(x, y) - params.q_star).abs()
        })
        .collect();
    gaps.sort_by(f64::total_cmp);
    Ok(t_grid
        .iter()
        .map(|&t| (t, gaps.partition_point(|&g| g <= t) as f64 / n_mc as f64))
        .collect())
}
