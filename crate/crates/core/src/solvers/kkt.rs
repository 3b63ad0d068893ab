//! Closed-form solution of the bilinear problem
//!
//! ```text
//! max <P, A>  s.t.  <N, A> <= beta,  <A, A> <= 1,      beta = 2 alpha - 1
//! ```
//!
//! through its KKT system `-P + lambda N + 2 gamma A = 0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{invalid, Error, Result};

/// Relative tolerance under which `P` is treated as a positive multiple of `N`.
const COLINEAR_TOL: f64 = 1e-10;

/// Which branch of the case analysis produced the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KktCase {
    ZeroP,
    Colinear,
    Interior,
    Boundary,
}

impl KktCase {
    pub fn as_str(self) -> &'static str {
        match self {
            KktCase::ZeroP => "zero-P",
            KktCase::Colinear => "colinear",
            KktCase::Interior => "interior",
            KktCase::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktSolution {
    pub a: DMatrix<f64>,
    pub lambda: f64,
    pub gamma: f64,
    pub case: KktCase,
    pub beta: f64,
}

impl KktSolution {
    /// `<P, A>`.
    pub fn objective(&self, p: &DMatrix<f64>) -> f64 {
        p.dot(&self.a)
    }
}

/// Violations of the KKT conditions at a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `||-P + lambda N + 2 gamma A||_F`.
    pub stationarity: f64,
    /// `max(0, <N, A> - beta)`.
    pub feas_n: f64,
    /// `max(0, <A, A> - 1)`.
    pub feas_norm: f64,
    /// `|lambda (<N, A> - beta)|`.
    pub cs_lambda: f64,
    /// `|gamma (<A, A> - 1)|`.
    pub cs_gamma: f64,
}

impl KktResiduals {
    /// All five residuals within `tol`, stationarity scaled by `max(1, ||P||_F)`.
    pub fn within(&self, tol: f64, p_norm: f64) -> bool {
        self.stationarity <= tol * p_norm.max(1.0)
            && self.feas_n <= tol
            && self.feas_norm <= tol
            && self.cs_lambda <= tol
            && self.cs_gamma <= tol
    }
}

pub fn kkt_residuals(sol: &KktSolution, p: &DMatrix<f64>, n: &DMatrix<f64>) -> KktResiduals {
    let a = &sol.a;
    let stationarity = (-p + n * sol.lambda + a * (2.0 * sol.gamma)).norm();
    let slack_n = n.dot(a) - sol.beta;
    let slack_norm = a.dot(a) - 1.0;
    KktResiduals {
        stationarity,
        feas_n: slack_n.max(0.0),
        feas_norm: slack_norm.max(0.0),
        cs_lambda: (sol.lambda * slack_n).abs(),
        cs_gamma: (sol.gamma * slack_norm).abs(),
    }
}

/// Symmetrized second-moment matrices of positive and negative pairs:
/// `P = (1 / 2n_+) sum_{i<j, Y_i = Y_j} (X_i X_j^T + X_j X_i^T)` and `N` likewise.
pub fn compute_p_n(ds: &LabeledDataset) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (n_plus, n_minus) = ds.pair_counts()?;
    if n_plus == 0 {
        return Err(Error::NoPositivePairs);
    }
    if n_minus == 0 {
        return Err(Error::NoNegativePairs);
    }
    let d = ds.dim();
    let mut total = DMatrix::<f64>::zeros(d, 1);
    let mut within = DMatrix::<f64>::zeros(d, d);
    for members in ds.class_index() {
        let mut sum = DMatrix::<f64>::zeros(d, 1);
        let mut second = DMatrix::<f64>::zeros(d, d);
        for &i in members {
            let x = DMatrix::from_column_slice(d, 1, ds.row(i));
            second += &x * x.transpose();
            sum += x;
        }
        // sum_{i<j in class} (x_i x_j^T + x_j x_i^T) = s s^T - sum_i x_i x_i^T
        within += &sum * sum.transpose() - second;
        total += sum;
    }
    let across = &total * total.transpose() - ds_second_moment(ds) - &within;
    let p = within / (2.0 * n_plus as f64);
    let n = across / (2.0 * n_minus as f64);
    Ok((p, n))
}

fn ds_second_moment(ds: &LabeledDataset) -> DMatrix<f64> {
    let d = ds.dim();
    let mut m = DMatrix::<f64>::zeros(d, d);
    for i in 0..ds.len() {
        let x = ds.row(i);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] += x[r] * x[c];
            }
        }
    }
    m
}

/// Solves the bilinear problem at level `alpha`.
///
/// Degenerate branches (`P = 0`, `P` a positive multiple of `N`) have a
/// continuum of optima; the minimum-norm one is returned.
pub fn solve_bilinear_kkt(p: &DMatrix<f64>, n: &DMatrix<f64>, alpha: f64) -> Result<KktSolution> {
    if !p.is_square() || p.shape() != n.shape() {
        return Err(invalid(format!("P is {:?} and N is {:?}", p.shape(), n.shape())));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha = {alpha} outside (0, 1)")));
    }
    let beta = 2.0 * alpha - 1.0;
    let r = n.norm_squared();
    let n_norm = r.sqrt();
    if beta < -n_norm {
        return Err(Error::Infeasible { beta, bound: -n_norm });
    }
    let d = p.nrows();
    let p_sq = p.norm_squared();
    let p_norm = p_sq.sqrt();
    let min_norm_on_plane = || if r > 0.0 { n * (beta / r) } else { DMatrix::zeros(d, d) };

    if p_norm == 0.0 {
        let a = if beta >= 0.0 { DMatrix::zeros(d, d) } else { min_norm_on_plane() };
        return Ok(KktSolution { a, lambda: 0.0, gamma: 0.0, case: KktCase::ZeroP, beta });
    }

    let q = n.dot(p);
    if q <= beta * p_norm {
        return Ok(KktSolution { a: p / p_norm, lambda: 0.0, gamma: p_norm / 2.0, case: KktCase::Interior, beta });
    }

    // Not interior, so q > beta ||P|| >= -||N|| ||P||, hence N != 0.
    let colinear_lambda = q / r;
    if q > 0.0 && (p - n * colinear_lambda).norm() <= COLINEAR_TOL * p_norm.max(1.0) {
        return Ok(KktSolution {
            a: min_norm_on_plane(),
            lambda: colinear_lambda,
            gamma: 0.0,
            case: KktCase::Colinear,
            beta,
        });
    }

    solve_boundary(p, n, beta, q, r, p_sq)
}

/// Both constraints active: `A = (P - lambda N) / ||P - lambda N||` with `<N, A> = beta`.
///
/// Squaring `<N, P - lambda N> = beta ||P - lambda N||` gives
/// `r (r - beta^2) lambda^2 - 2 q (r - beta^2) lambda + q^2 - beta^2 p = 0`
/// with roots `(q -/+ |beta| sqrt((r p - q^2) / (r - beta^2))) / r`; for
/// `beta = 0` the equation is linear, `lambda = q / r`.
fn solve_boundary(p: &DMatrix<f64>, n: &DMatrix<f64>, beta: f64, q: f64, r: f64, p_sq: f64) -> Result<KktSolution> {
    let gap = r - beta * beta;
    if gap <= 1e-14 * r {
        return Err(Error::Numerical(format!(
            "feasible set reduces to a single point (beta^2 = {:e}, ||N||^2 = {r:e})",
            beta * beta
        )));
    }
    let spread = ((r * p_sq - q * q).max(0.0) / gap).sqrt();
    let roots = if beta == 0.0 { vec![q / r] } else { vec![(q - beta.abs() * spread) / r, (q + beta.abs() * spread) / r] };

    let scale = p_sq.sqrt().max(1.0);
    let mut best: Option<(f64, KktSolution)> = None;
    let mut diagnostics = Vec::new();
    for root in roots {
        let lambda = polish_lambda(p, n, beta, root);
        let m = p - n * lambda;
        let m_norm = m.norm();
        let a = &m / m_norm;
        let slack = n.dot(&a) - beta;
        diagnostics.push(format!("lambda = {lambda:e}, <N,A> - beta = {slack:e}"));
        if lambda < -1e-12 * scale || m_norm <= 0.0 || slack.abs() > 1e-9 {
            continue;
        }
        let sol = KktSolution { a, lambda: lambda.max(0.0), gamma: m_norm / 2.0, case: KktCase::Boundary, beta };
        let obj = sol.objective(p);
        if best.as_ref().map_or(true, |(b, _)| obj > *b) {
            best = Some((obj, sol));
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| Error::Numerical(format!("no admissible boundary root: {}", diagnostics.join("; "))))
}

/// Newton refinement of `phi(lambda) = <N, P - lambda N> - beta ||P - lambda N||`.
fn polish_lambda(p: &DMatrix<f64>, n: &DMatrix<f64>, beta: f64, mut lambda: f64) -> f64 {
    let r = n.norm_squared();
    let q = n.dot(p);
    for _ in 0..3 {
        let m_norm = (p - n * lambda).norm();
        if m_norm == 0.0 {
            break;
        }
        let inner = q - lambda * r;
        let phi = inner - beta * m_norm;
        let dphi = -r + beta * inner / m_norm;
        if dphi == 0.0 {
            break;
        }
        let next = lambda - phi / dphi;
        if !next.is_finite() {
            break;
        }
        lambda = next;
    }
    lambda
}
