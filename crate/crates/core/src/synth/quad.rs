//! Adaptive quadrature on intervals and rectangles with known kinks.

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 30;
/// Error per unit length below which a piece is accepted whatever its share of `tol`.
const ROUNDOFF_DENSITY: f64 = 1e-13;

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> Result<f64> {
    let out = quadrature::integrate(f, a, b, tol);
    if out.error_estimate <= tol.max(ROUNDOFF_DENSITY * (b - a)) {
        return Ok(out.integral);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Numerical(format!(
            "quadrature on [{a}, {b}] stalled at error estimate {:e}",
            out.error_estimate
        )));
    }
    let mid = 0.5 * (a + b);
    Ok(adaptive(f, a, mid, 0.5 * tol, depth + 1)? + adaptive(f, mid, b, 0.5 * tol, depth + 1)?)
}

/// `int_a^b f` to absolute tolerance `tol`, split at the `breaks` inside `(a, b)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    let mut knots = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    knots.extend(inner);
    knots.push(b);
    let per_piece = tol / (knots.len() - 1) as f64;
    knots.windows(2).map(|w| adaptive(&f, w[0], w[1], per_piece, 0)).sum()
}

/// `int_{[a,b]^2} f(x, y) dx dy` by nested one-dimensional quadrature.
pub fn integrate_square<F: Fn(f64, f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    let inner_tol = tol / (4.0 * (b - a).max(1.0));
    let inner_err = std::cell::RefCell::new(None);
    let outer = integrate(
        |x| match integrate(|y| f(x, y), a, b, breaks, inner_tol) {
            Ok(v) => v,
            Err(e) => {
                inner_err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        breaks,
        tol / 2.0,
    )?;
    if let Some(e) = inner_err.into_inner() {
        return Err(e);
    }
    Ok(outer)
}
