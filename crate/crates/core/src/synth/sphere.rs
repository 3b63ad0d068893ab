//! Three classes on the unit sphere of `R^3`, each uniform on a spherical cap.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, TAU};

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{invalid, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereParams {
    pub centroids: Vec<[f64; 3]>,
    pub cap_half_angle: f64,
    pub class_probs: Vec<f64>,
}

impl Default for SphereParams {
    fn default() -> Self {
        Self {
            centroids: vec![[FRAC_PI_3.cos(), FRAC_PI_3.sin(), 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            cap_half_angle: FRAC_PI_4,
            class_probs: vec![1.0 / 3.0; 3],
        }
    }
}

impl SphereParams {
    pub fn validate(&self) -> Result<()> {
        if self.centroids.is_empty() || self.centroids.len() != self.class_probs.len() {
            return Err(invalid("need one class probability per centroid"));
        }
        if self.centroids.iter().any(|c| (norm(c) - 1.0).abs() > 1e-12) {
            return Err(invalid("centroids must be unit vectors"));
        }
        if !(self.cap_half_angle > 0.0 && self.cap_half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(invalid("cap half-angle must lie in (0, pi/2)"));
        }
        Ok(())
    }
}

fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn cross(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

/// Orthonormal `(u, w)` completing `c` to a right-handed frame.
fn frame(c: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot: f64 = helper.iter().zip(c).map(|(a, b)| a * b).sum();
    let mut u = [helper[0] - dot * c[0], helper[1] - dot * c[1], helper[2] - dot * c[2]];
    let nu = norm(&u);
    u.iter_mut().for_each(|x| *x /= nu);
    let w = cross(c, &u);
    (u, w)
}

/// Labels drawn from `class_probs`, points uniform (surface measure) on the
/// cap of half-angle `cap_half_angle` around the class centroid.
pub fn sample_sphere(params: &SphereParams, n: usize, seed: u64) -> Result<LabeledDataset> {
    params.validate()?;
    let classes = WeightedIndex::new(&params.class_probs).map_err(|e| invalid(e.to_string()))?;
    let frames: Vec<_> = params.centroids.iter().map(frame).collect();
    let cos_max = params.cap_half_angle.cos();
    let mut rng = rng::stream(seed);
    let mut features = Vec::with_capacity(3 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let k = classes.sample(&mut rng);
        // cos(theta) uniform on (cos_max, 1] is uniform surface measure on the cap.
        let cos_t = 1.0 - rng.random::<f64>() * (1.0 - cos_max);
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let phi = rng.random::<f64>() * TAU;
        let c = &params.centroids[k];
        let (u, w) = &frames[k];
        let mut x = [0.0; 3];
        for i in 0..3 {
            x[i] = cos_t * c[i] + sin_t * (phi.cos() * u[i] + phi.sin() * w[i]);
        }
        let nx = norm(&x);
        features.extend(x.iter().map(|v| v / nx));
        labels.push(k + 1);
    }
    LabeledDataset::new(features, 3, labels, params.centroids.len())
}
