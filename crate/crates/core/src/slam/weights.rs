use nalgebra::Vector2;
use rand::Rng;

use crate::error::SlamError;

use super::particle::Particle;
use super::pose::Pose2D;

/// Scales the weights to sum to one. Non-positive or non-finite totals reset
/// the weights to uniform and report degeneracy.
pub fn normalize(weights: &mut [f64]) -> Result<(), SlamError> {
    let sum: f64 = weights.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) || weights.iter().any(|w| !(*w >= 0.0)) {
        let u = 1.0 / weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = u);
        return Err(SlamError::Degenerate);
    }
    weights.iter_mut().for_each(|w| *w /= sum);
    Ok(())
}

/// `N_eff / N_p` with `N_eff = 1 / Σω²`, for normalized weights.
pub fn effective_sample_ratio(weights: &[f64]) -> f64 {
    let ss: f64 = weights.iter().map(|w| w * w).sum();
    1.0 / ss / weights.len() as f64
}

/// Low-variance (systematic) selection: one uniform offset `u ∈ [0, 1)`, then
/// `N` evenly spaced pointers through the cumulative weights.
pub fn systematic_indices(weights: &[f64], u: f64) -> Vec<usize> {
    let n = weights.len();
    let mut out = Vec::with_capacity(n);
    let mut cum = weights[0];
    let mut i = 0;
    for j in 0..n {
        let pointer = (u + j as f64) / n as f64;
        while pointer > cum && i + 1 < n {
            i += 1;
            cum += weights[i];
        }
        out.push(i);
    }
    out
}

/// Draws a new particle set by systematic resampling. Survivors are moved,
/// duplicates are deep copies, and all weights become uniform.
pub fn resample<R: Rng>(particles: Vec<Particle>, rng: &mut R) -> Vec<Particle> {
    let weights: Vec<f64> = particles.iter().map(|p| p.weight).collect();
    let idx = systematic_indices(&weights, rng.random::<f64>());
    let n = particles.len();
    let mut last_use = vec![usize::MAX; n];
    for (j, &i) in idx.iter().enumerate() {
        last_use[i] = j;
    }
    let mut slots: Vec<Option<Particle>> = particles.into_iter().map(Some).collect();
    let u = 1.0 / n as f64;
    idx.iter()
        .enumerate()
        .map(|(j, &i)| {
            let mut p = if last_use[i] == j {
                slots[i].take().expect("particle moved once")
            } else {
                slots[i].clone().expect("particle still present")
            };
            p.weight = u;
            p
        })
        .collect()
}

/// Weighted mean position and weighted circular-mean heading.
pub fn estimate_pose(poses: &[Pose2D], weights: &[f64]) -> Pose2D {
    let mut p = Vector2::zeros();
    let (mut s, mut c) = (0.0, 0.0);
    for (pose, w) in poses.iter().zip(weights) {
        p += pose.p * *w;
        s += w * pose.heading.sin();
        c += w * pose.heading.cos();
    }
    let heading = if s.hypot(c) > 1e-12 {
        s.atan2(c)
    } else {
        log::warn!("heading resultant vanished; using the heaviest particle");
        let best = (0..weights.len()).fold(0, |b, i| if weights[i] > weights[b] { i } else { b });
        poses[best].heading
    };
    Pose2D::new(p.x, p.y, heading)
}

pub fn estimate(particles: &[Particle]) -> Pose2D {
    let poses: Vec<Pose2D> = particles.iter().map(|p| p.pose).collect();
    let weights: Vec<f64> = particles.iter().map(|p| p.weight).collect();
    estimate_pose(&poses, &weights)
}
