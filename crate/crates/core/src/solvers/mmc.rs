//! MMC metric learning by projected gradient ascent:
//!
//! ```text
//! max_A  (1/n_-) sum_{Y_i != Y_j} d_A(X_i, X_j)
//! s.t.   (1/n_+) sum_{Y_i = Y_j} d_A(X_i, X_j)^2 <= 1,   A PSD
//! ```
//!
//! The negative average can be replaced by its tuple-sampled incomplete
//! version, drawn once per run.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{invalid, Error, Result};
use crate::risk::{draw_tuple, require_nonempty_classes, tuple_weights};
use crate::rng;

use super::psd::psd_project;

/// Terms per parallel chunk. Fixed so that sums do not depend on the worker count.
const CHUNK: usize = 4096;
/// Step multiplier after an accepted step, and the cap on the relative step.
const STEP_GROWTH: f64 = 1.5;
const MAX_STEP: f64 = 1.0;
/// Alternating halfspace / PSD projections per step.
const MAX_PROJECTIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MmcConfig {
    /// Step length relative to `||A||_F`, along the normalized gradient.
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop when the relative objective gain of an accepted step falls below this.
    pub tol: f64,
    /// Number of K-tuples for the sampled negative objective; `None` uses all negative pairs.
    pub tuple_budget: Option<u64>,
    pub seed: u64,
}

impl Default for MmcConfig {
    fn default() -> Self {
        Self { step_size: 1e-2, max_iters: 2000, tol: 1e-6, tuple_budget: None, seed: 0 }
    }
}

impl MmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !(self.tol > 0.0) {
            return Err(invalid("MMC step size and tolerance must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("MMC needs at least one iteration"));
        }
        if self.tuple_budget == Some(0) {
            return Err(invalid("tuple budget must be at least 1"));
        }
        Ok(())
    }
}

/// One accepted iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub constraint: f64,
    pub step_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmcResult {
    pub a: DMatrix<f64>,
    /// Training objective (sampled when a tuple budget is set).
    pub objective: f64,
    pub constraint: f64,
    pub iterations: usize,
    pub converged: bool,
    pub pair_evaluations_per_iter: u64,
    pub trace: Vec<TraceRow>,
}

/// Weighted pair differences `delta = x_i - x_j`, stored row-major.
struct PairTerms {
    dim: usize,
    deltas: Vec<f64>,
    /// Per-term weights; `None` means every term has weight `uniform`.
    weights: Option<Vec<f64>>,
    uniform: f64,
}

impl PairTerms {
    fn len(&self) -> usize {
        self.deltas.len() / self.dim
    }

    fn all_negative(ds: &LabeledDataset, n_minus: u64) -> Self {
        let d = ds.dim();
        let mut deltas = Vec::with_capacity(n_minus as usize * d);
        for i in 0..ds.len() {
            for j in i + 1..ds.len() {
                if ds.label(i) != ds.label(j) {
                    deltas.extend(ds.row(i).iter().zip(ds.row(j)).map(|(a, b)| a - b));
                }
            }
        }
        Self { dim: d, deltas, weights: None, uniform: 1.0 / n_minus as f64 }
    }

    fn sampled_tuples(ds: &LabeledDataset, budget: u64, seed: u64) -> Result<Self> {
        require_nonempty_classes(ds)?;
        let class_w = tuple_weights(ds.class_counts())?;
        let d = ds.dim();
        let k = ds.n_classes();
        let mut rng = rng::stream(seed);
        let mut tuple = Vec::with_capacity(k);
        let mut deltas = Vec::new();
        let mut weights = Vec::new();
        for _ in 0..budget {
            draw_tuple(ds, &mut rng, &mut tuple);
            let mut w = class_w.iter();
            for a in 0..k {
                for b in a + 1..k {
                    deltas.extend(ds.row(tuple[a]).iter().zip(ds.row(tuple[b])).map(|(u, v)| u - v));
                    weights.push(w.next().unwrap() / budget as f64);
                }
            }
        }
        Ok(Self { dim: d, deltas, weights: Some(weights), uniform: 0.0 })
    }

    fn weight(&self, t: usize) -> f64 {
        self.weights.as_ref().map_or(self.uniform, |w| w[t])
    }

    /// `sum_t w_t d_A(delta_t)` and, if requested, its gradient
    /// `sum_t w_t delta_t delta_t^T / (2 d_A(delta_t))` (zero at coincident points).
    fn evaluate(&self, a: &DMatrix<f64>, with_grad: bool) -> (f64, DMatrix<f64>) {
        let d = self.dim;
        let a_rows: Vec<f64> = a.transpose().iter().copied().collect();
        let n_chunks = self.len().div_ceil(CHUNK);
        let partials: Vec<(f64, Vec<f64>)> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(self.len());
                let mut value = 0.0;
                let mut grad = if with_grad { vec![0.0; d * d] } else { Vec::new() };
                let mut ad = vec![0.0; d];
                for t in start..end {
                    let delta = &self.deltas[t * d..(t + 1) * d];
                    let mut quad = 0.0;
                    for r in 0..d {
                        let row = &a_rows[r * d..(r + 1) * d];
                        ad[r] = row.iter().zip(delta).map(|(x, y)| x * y).sum();
                        quad += delta[r] * ad[r];
                    }
                    let dist = quad.max(0.0).sqrt();
                    let w = self.weight(t);
                    value += w * dist;
                    if with_grad && dist > 0.0 {
                        let coef = w / (2.0 * dist);
                        for r in 0..d {
                            let cr = coef * delta[r];
                            for s in 0..d {
                                grad[r * d + s] += cr * delta[s];
                            }
                        }
                    }
                }
                (value, grad)
            })
            .collect();
        let mut value = 0.0;
        let mut grad = DMatrix::<f64>::zeros(d, d);
        for (v, g) in partials {
            value += v;
            if with_grad {
                for r in 0..d {
                    for s in 0..d {
                        grad[(r, s)] += g[r * d + s];
                    }
                }
            }
        }
        (value, grad)
    }
}

/// `M_+ = (1/n_+) sum_{i<j, Y_i = Y_j} (x_i - x_j)(x_i - x_j)^T`, so that the
/// positive constraint reads `<A, M_+> <= 1`.
pub fn positive_scatter(ds: &LabeledDataset) -> Result<DMatrix<f64>> {
    let (n_plus, _) = ds.pair_counts()?;
    if n_plus == 0 {
        return Err(Error::NoPositivePairs);
    }
    let d = ds.dim();
    let mut m = DMatrix::<f64>::zeros(d, d);
    for members in ds.class_index() {
        // sum_{i<j} (x_i - x_j)(x_i - x_j)^T = n_k sum_i x_i x_i^T - s s^T
        let mut sum = DMatrix::<f64>::zeros(d, 1);
        let mut second = DMatrix::<f64>::zeros(d, d);
        for &i in members {
            let x = DMatrix::from_column_slice(d, 1, ds.row(i));
            second += &x * x.transpose();
            sum += x;
        }
        m += second * members.len() as f64 - &sum * sum.transpose();
    }
    Ok(m / n_plus as f64)
}

/// Full-pair MMC objective and positive constraint of `a` on `ds`.
pub fn mmc_objective(ds: &LabeledDataset, a: &DMatrix<f64>) -> Result<(f64, f64)> {
    let (_, n_minus) = ds.pair_counts()?;
    if n_minus == 0 {
        return Err(Error::NoNegativePairs);
    }
    if a.nrows() != ds.dim() || !a.is_square() {
        return Err(invalid("metric dimension does not match the data"));
    }
    let constraint = positive_scatter(ds)?.dot(a);
    let mut objective = 0.0;
    for i in 0..ds.len() {
        let mut row = 0.0;
        for j in i + 1..ds.len() {
            if ds.label(i) != ds.label(j) {
                row += crate::model::mahalanobis_sq(a, ds.row(i), ds.row(j)).max(0.0).sqrt();
            }
        }
        objective += row;
    }
    Ok((objective / n_minus as f64, constraint))
}

/// Brings `a` back into `{<A, M_+> <= 1, A PSD}` by alternating the Euclidean
/// projection onto the halfspace with the PSD projection. If that has not
/// settled after `MAX_PROJECTIONS` rounds, the PSD iterate is rescaled onto the halfspace.
fn project_feasible(mut a: DMatrix<f64>, m_pos: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m_sq = m_pos.norm_squared();
    for _ in 0..MAX_PROJECTIONS {
        let g = m_pos.dot(&a);
        if g > 1.0 {
            a -= m_pos * ((g - 1.0) / m_sq);
        }
        a = psd_project(&a)?;
        if m_pos.dot(&a) <= 1.0 + 1e-12 {
            return Ok(a);
        }
    }
    let g = m_pos.dot(&a);
    if g > 1.0 {
        a /= g;
    }
    Ok(a)
}

/// Projected gradient ascent from `A_0 = I / <I, M_+>`.
///
/// Each step moves `A` by `step * ||A||_F` along the normalized gradient and
/// projects back; a step that lowers the objective is retried at half
/// length, so accepted iterates are monotone. Accepted steps grow the next one by half.
pub fn mmc_projected_gradient(ds: &LabeledDataset, cfg: &MmcConfig) -> Result<MmcResult> {
    cfg.validate()?;
    let (n_plus, n_minus) = ds.pair_counts()?;
    if n_plus == 0 {
        return Err(Error::NoPositivePairs);
    }
    if n_minus == 0 {
        return Err(Error::NoNegativePairs);
    }
    let m_pos = positive_scatter(ds)?;
    let terms = match cfg.tuple_budget {
        Some(b) => PairTerms::sampled_tuples(ds, b, cfg.seed)?,
        None => PairTerms::all_negative(ds, n_minus),
    };
    let d = ds.dim();
    let trace_m = m_pos.trace();
    if !(trace_m > 0.0) {
        return Err(Error::Numerical("positive pairs have zero scatter".into()));
    }
    let mut a = DMatrix::<f64>::identity(d, d) / trace_m;
    let (mut obj, mut grad) = terms.evaluate(&a, true);
    let mut step = cfg.step_size;
    let mut trace = vec![TraceRow { iter: 0, objective: obj, constraint: m_pos.dot(&a), step_size: step }];
    let mut converged = false;
    let mut iterations = 0;
    let started = Instant::now();

    'outer: for iter in 1..=cfg.max_iters {
        iterations = iter;
        let g_norm = grad.norm();
        if g_norm == 0.0 {
            converged = true;
            break;
        }
        loop {
            let candidate = &a + &grad * (step * a.norm() / g_norm);
            let candidate = project_feasible(candidate, &m_pos)?;
            let (cand_obj, cand_grad) = terms.evaluate(&candidate, true);
            if cand_obj >= obj {
                let gain = (cand_obj - obj) / obj.abs().max(f64::MIN_POSITIVE);
                a = candidate;
                obj = cand_obj;
                grad = cand_grad;
                trace.push(TraceRow { iter, objective: obj, constraint: m_pos.dot(&a), step_size: step });
                step = (step * STEP_GROWTH).min(MAX_STEP);
                if gain < cfg.tol {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                converged = true;
                break 'outer;
            }
        }
    }
    log::debug!(
        "mmc: {} iterations, objective {obj:.6}, {} terms, {:.2}s",
        iterations,
        terms.len(),
        started.elapsed().as_secs_f64()
    );
    if !converged {
        log::warn!("mmc: no convergence after {} iterations", cfg.max_iters);
    }
    let constraint = m_pos.dot(&a);
    Ok(MmcResult {
        a,
        objective: obj,
        constraint,
        iterations,
        converged,
        pair_evaluations_per_iter: terms.len() as u64,
        trace,
    })
}

/// Writes an iteration trace as CSV with columns `iter,objective,constraint,step_size`.
pub fn write_trace_csv<W: std::io::Write>(trace: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
