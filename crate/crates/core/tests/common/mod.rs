//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rocsim::{LabeledDataset, Similarity};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dataset with every class present, features uniform in `[-1, 1]`.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, k: usize, d: usize) -> LabeledDataset {
    assert!(n >= k);
    let mut labels: Vec<usize> = (1..=k).collect();
    labels.extend((k..n).map(|_| rng.random_range(1..=k)));
    let features = (0..n * d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    LabeledDataset::new(features, d, labels, k).unwrap()
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    (&m + m.transpose()) * 0.5
}

/// `(R^+_n, R^-_n)` by a plain double loop over ordered pairs `i != j`.
pub fn naive_risks<S: Similarity>(ds: &LabeledDataset, s: &S) -> (f64, f64) {
    let (mut sp, mut np, mut sn, mut nn) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..ds.len() {
        for j in 0..ds.len() {
            if i == j {
                continue;
            }
            let v = s.similarity(ds.row(i), ds.row(j));
            if ds.label(i) == ds.label(j) {
                sp += v;
                np += 1.0;
            } else {
                sn += v;
                nn += 1.0;
            }
        }
    }
    (sp / np, sn / nn)
}

/// Euclidean projection onto `{||A||_F <= 1} ∩ {<N, A> <= beta}` (assumed non-empty).
pub fn project_ball_halfspace(y: &DMatrix<f64>, n: &DMatrix<f64>, beta: f64) -> DMatrix<f64> {
    let n_norm = n.norm();
    let in_half = |a: &DMatrix<f64>| n.dot(a) <= beta + 1e-15;
    if y.norm() <= 1.0 && in_half(y) {
        return y.clone();
    }
    if y.norm() > 1.0 {
        let on_ball = y / y.norm();
        if in_half(&on_ball) {
            return on_ball;
        }
    }
    if n_norm == 0.0 {
        return y / y.norm().max(1.0);
    }
    let u = n / n_norm;
    let on_half = y - &u * (u.dot(y) - beta / n_norm).max(0.0);
    if on_half.norm() <= 1.0 {
        return on_half;
    }
    // Both constraints active: circle of radius sqrt(1 - b^2) around b u in the hyperplane.
    let b = beta / n_norm;
    let perp = y - &u * u.dot(y);
    let radius = (1.0 - b * b).max(0.0).sqrt();
    let pn = perp.norm();
    if pn == 0.0 {
        return &u * b;
    }
    &u * b + perp * (radius / pn)
}

/// Projected gradient ascent on `<P, A>` over the feasible set.
pub fn pga_bilinear(p: &DMatrix<f64>, n: &DMatrix<f64>, beta: f64, iters: usize) -> DMatrix<f64> {
    let step = 1.0 / p.norm().max(1e-12);
    let mut a = project_ball_halfspace(&DMatrix::zeros(p.nrows(), p.ncols()), n, beta);
    for _ in 0..iters {
        let next = project_ball_halfspace(&(&a + p * step), n, beta);
        if (&next - &a).norm() < 1e-15 {
            return next;
        }
        a = next;
    }
    a
}

/// `min(max(1-x, 1-x'), max(x, x'))`, written out independently.
pub fn corner_distance(x: f64, y: f64) -> f64 {
    let to_origin = if x > y { x } else { y };
    let to_one = if 1.0 - x > 1.0 - y { 1.0 - x } else { 1.0 - y };
    if to_origin < to_one {
        to_origin
    } else {
        to_one
    }
}

/// Exhaustive search over every distinct pair set `{stat < t}`: `(t, r_plus, r_minus)`.
pub fn brute_force_threshold(ds: &LabeledDataset, alpha: f64) -> (f64, f64, f64) {
    let n = ds.len();
    let mut stats = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            stats.push(corner_distance(ds.row(i)[0], ds.row(j)[0]));
        }
    }
    stats.sort_by(f64::total_cmp);
    stats.dedup();
    let mut candidates = vec![0.0];
    for (k, &s) in stats.iter().enumerate() {
        let next = stats.get(k + 1).copied().unwrap_or(1.0);
        let t = 0.5 * (s + next);
        if s < t && t <= next {
            candidates.push(t);
        }
    }
    let count = |t: f64| {
        let (mut pos, mut neg, mut np, mut nn) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let inside = corner_distance(ds.row(i)[0], ds.row(j)[0]) < t;
                if ds.label(i) == ds.label(j) {
                    np += 1.0;
                    pos += inside as u8 as f64;
                } else {
                    nn += 1.0;
                    neg += inside as u8 as f64;
                }
            }
        }
        (pos / np, neg / nn)
    };
    let mut best = (0.0, 0.0, 0.0);
    for t in candidates {
        let (rp, rm) = count(t);
        if rm <= alpha && rp > best.1 {
            best = (t, rp, rm);
        }
    }
    best
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, _) = mean_var(x);
    let (my, _) = mean_var(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
