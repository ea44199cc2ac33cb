use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Upper bound on the magnitude of any bank angle the field may produce.
pub const MAX_BANK_RAD: f64 = 15.0 * std::f64::consts::PI / 180.0;

/// Gaussian radial bump in the bank-angle field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    /// Peak bank angle, rad. May be negative.
    pub amplitude: f64,
    pub length_scale: f64,
}

/// Plane-wave bank undulation `A·sin(2π(u·p)/λ + φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corrugation {
    pub amplitude: f64,
    pub wavelength: f64,
    /// Direction of the wave vector, rad.
    pub direction: f64,
    pub phase: f64,
}

/// Smooth road-bank field `B(x, y)` in radians.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TerrainModel {
    bumps: Vec<Bump>,
    corrugation: Option<Corrugation>,
}

impl TerrainModel {
    pub fn flat() -> Self {
        Self::default()
    }

    pub fn new(bumps: Vec<Bump>, corrugation: Option<Corrugation>) -> Result<Self, SimError> {
        for b in &bumps {
            if !(b.center.iter().all(|c| c.is_finite()) && b.amplitude.is_finite()) {
                return Err(SimError::InvalidTerrain("non-finite bump".into()));
            }
            if !(b.length_scale > 0.0 && b.length_scale.is_finite()) {
                return Err(SimError::InvalidTerrain("bump length scale must be positive".into()));
            }
        }
        if let Some(c) = &corrugation {
            if !(c.wavelength > 0.0 && c.amplitude.is_finite() && c.direction.is_finite()) {
                return Err(SimError::InvalidTerrain("invalid corrugation".into()));
            }
        }
        let model = Self { bumps, corrugation };
        let peak = model.peak_magnitude_bound();
        if peak >= MAX_BANK_RAD {
            return Err(SimError::InvalidTerrain(format!(
                "bank field reaches {:.2}°, limit is 15°",
                peak.to_degrees()
            )));
        }
        Ok(model)
    }

    /// `count` bumps with random sign, amplitudes in `amp_rad` and length scales in
    /// `scale_m`, centred inside the box `[min, max]`. Redraws until the field
    /// respects the bank limit.
    pub fn random_bumps(
        count: usize,
        min: [f64; 2],
        max: [f64; 2],
        amp_rad: (f64, f64),
        scale_m: (f64, f64),
        seed: u64,
    ) -> Result<Self, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..64 {
            let bumps = (0..count)
                .map(|_| {
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    Bump {
                        center: [rng.random_range(min[0]..max[0]), rng.random_range(min[1]..max[1])],
                        amplitude: sign * rng.random_range(amp_rad.0..=amp_rad.1),
                        length_scale: rng.random_range(scale_m.0..=scale_m.1),
                    }
                })
                .collect();
            if let Ok(model) = Self::new(bumps, None) {
                return Ok(model);
            }
        }
        Err(SimError::InvalidTerrain("could not draw a field inside the bank limit".into()))
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    pub fn corrugation(&self) -> Option<&Corrugation> {
        self.corrugation.as_ref()
    }

    pub fn is_flat(&self) -> bool {
        self.bumps.iter().all(|b| b.amplitude == 0.0)
            && self.corrugation.is_none_or(|c| c.amplitude == 0.0)
    }

    /// Bank angle at a horizontal position, rad.
    pub fn bank_at(&self, p: &Vector2<f64>) -> f64 {
        let mut bank = 0.0;
        for b in &self.bumps {
            let d2 = (p.x - b.center[0]).powi(2) + (p.y - b.center[1]).powi(2);
            bank += b.amplitude * (-0.5 * d2 / (b.length_scale * b.length_scale)).exp();
        }
        if let Some(c) = &self.corrugation {
            let u = Vector2::new(c.direction.cos(), c.direction.sin());
            bank += c.amplitude * (std::f64::consts::TAU * u.dot(p) / c.wavelength + c.phase).sin();
        }
        bank
    }

    /// Spatial gradient of the bank field, rad/m.
    pub fn bank_gradient(&self, p: &Vector2<f64>) -> Vector2<f64> {
        let mut g = Vector2::zeros();
        for b in &self.bumps {
            let d = Vector2::new(p.x - b.center[0], p.y - b.center[1]);
            let l2 = b.length_scale * b.length_scale;
            let v = b.amplitude * (-0.5 * d.norm_squared() / l2).exp();
            g -= d * (v / l2);
        }
        if let Some(c) = &self.corrugation {
            let u = Vector2::new(c.direction.cos(), c.direction.sin());
            let k = std::f64::consts::TAU / c.wavelength;
            g += u * (c.amplitude * k * (k * u.dot(p) + c.phase).cos());
        }
        g
    }

    /// Sampled upper estimate of max |B| over the plane.
    fn peak_magnitude_bound(&self) -> f64 {
        let corr = self.corrugation.map_or(0.0, |c| c.amplitude.abs());
        if self.bumps.is_empty() {
            return corr;
        }
        let lmin = self.bumps.iter().map(|b| b.length_scale).fold(f64::INFINITY, f64::min);
        let xs = self.bumps.iter().map(|b| b.center[0]);
        let ys = self.bumps.iter().map(|b| b.center[1]);
        let (x0, x1) = (xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max));
        let (y0, y1) = (ys.clone().fold(f64::INFINITY, f64::min), ys.fold(f64::NEG_INFINITY, f64::max));
        let step = lmin / 4.0;
        let nx = (((x1 - x0) / step).ceil() as usize).min(2000) + 1;
        let ny = (((y1 - y0) / step).ceil() as usize).min(2000) + 1;
        let bumps_only = Self { bumps: self.bumps.clone(), corrugation: None };
        let mut peak: f64 = 0.0;
        for i in 0..nx {
            for j in 0..ny {
                let p = Vector2::new(
                    x0 + (x1 - x0) * i as f64 / (nx.max(2) - 1) as f64,
                    y0 + (y1 - y0) * j as f64 / (ny.max(2) - 1) as f64,
                );
                peak = peak.max(bumps_only.bank_at(&p).abs());
            }
        }
        // grid spacing of ℓ/4 can miss at most ~1% of a Gaussian peak
        peak * 1.01 + corr
    }
}
