use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::imu::{stream_rate, ImuSample};
use crate::math::Vec3;

const DEG: f64 = std::f64::consts::PI / 180.0;

/// Inertial sensor error grade, in datasheet units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorErrorSpec {
    /// Constant gyro bias magnitude, °/h.
    pub gyro_bias_dph: f64,
    /// Angle random walk, °/√h.
    pub arw_deg_rt_h: f64,
    /// Constant accelerometer bias magnitude, m/s².
    pub accel_bias_ms2: f64,
    /// Velocity random walk, m/s/√h.
    pub vrw_ms_rt_h: f64,
    /// Gyro scale-factor error, ppm, common to the triad.
    pub gyro_scale_ppm: f64,
    /// Accelerometer scale-factor error, ppm, common to the triad.
    pub accel_scale_ppm: f64,
    pub seed: u64,
}

impl SensorErrorSpec {
    pub fn ideal() -> Self {
        Self {
            gyro_bias_dph: 0.0,
            arw_deg_rt_h: 0.0,
            accel_bias_ms2: 0.0,
            vrw_ms_rt_h: 0.0,
            gyro_scale_ppm: 0.0,
            accel_scale_ppm: 0.0,
            seed: 0,
        }
    }

    /// Consumer MEMS grade (ICM20602) without scale-factor error.
    pub fn icm20602(seed: u64) -> Self {
        Self {
            gyro_bias_dph: 200.0,
            arw_deg_rt_h: 0.24,
            accel_bias_ms2: 0.01,
            vrw_ms_rt_h: 3.0,
            seed,
            ..Self::ideal()
        }
    }

    /// ICM20602 noise plus a 5000 ppm gyro sensitivity error (half the
    /// datasheet's ±1% tolerance), the grade used by the benchmark scene.
    pub fn icm20602_uncalibrated(seed: u64) -> Self {
        Self { gyro_scale_ppm: 5000.0, ..Self::icm20602(seed) }
    }

    pub fn is_ideal(&self) -> bool {
        [
            self.gyro_bias_dph,
            self.arw_deg_rt_h,
            self.accel_bias_ms2,
            self.vrw_ms_rt_h,
            self.gyro_scale_ppm,
            self.accel_scale_ppm,
        ]
        .iter()
        .all(|v| *v == 0.0)
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.gyro_bias_dph,
            self.arw_deg_rt_h,
            self.accel_bias_ms2,
            self.vrw_ms_rt_h,
            self.gyro_scale_ppm,
            self.accel_scale_ppm,
        ];
        if all.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err("sensor error parameters must be non-negative".into())
        }
    }

    /// Gyro white-noise density, rad/√s.
    pub fn gyro_noise_density(&self) -> f64 {
        self.arw_deg_rt_h * DEG / 60.0
    }

    /// Accelerometer white-noise density, m/s²/√Hz.
    pub fn accel_noise_density(&self) -> f64 {
        self.vrw_ms_rt_h / 60.0
    }
}

/// The error values drawn for one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorErrorRealization {
    pub gyro_bias: Vec3,
    pub accel_bias: Vec3,
    pub gyro_scale: f64,
    pub accel_scale: f64,
}

fn signed(rng: &mut ChaCha8Rng, magnitude: f64) -> f64 {
    if rng.random_bool(0.5) { magnitude } else { -magnitude }
}

impl SensorErrorRealization {
    pub fn draw(spec: &SensorErrorSpec) -> (Self, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let gb = spec.gyro_bias_dph * DEG / 3600.0;
        let ab = spec.accel_bias_ms2;
        let gyro_bias = Vec3::new(signed(&mut rng, gb), signed(&mut rng, gb), signed(&mut rng, gb));
        let accel_bias = Vec3::new(signed(&mut rng, ab), signed(&mut rng, ab), signed(&mut rng, ab));
        let gyro_scale = signed(&mut rng, spec.gyro_scale_ppm * 1e-6);
        let accel_scale = signed(&mut rng, spec.accel_scale_ppm * 1e-6);
        (Self { gyro_bias, accel_bias, gyro_scale, accel_scale }, rng)
    }
}

/// Applies scale factor, constant bias and white noise to an ideal stream.
pub fn corrupt(stream: &[ImuSample], spec: &SensorErrorSpec) -> Vec<ImuSample> {
    if spec.is_ideal() {
        return stream.to_vec();
    }
    let (real, mut rng) = SensorErrorRealization::draw(spec);
    let rate = stream_rate(stream).unwrap_or(1.0);
    let sg = spec.gyro_noise_density() * rate.sqrt();
    let sa = spec.accel_noise_density() * rate.sqrt();
    let mut noise = |sigma: f64| -> Vec3 {
        if sigma == 0.0 {
            return Vec3::zeros();
        }
        Vec3::from_fn(|_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
    };
    stream
        .iter()
        .map(|s| {
            let gyro = s.gyro * (1.0 + real.gyro_scale) + real.gyro_bias + noise(sg);
            let accel = s.accel * (1.0 + real.accel_scale) + real.accel_bias + noise(sa);
            ImuSample::new(s.t, gyro, accel)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imu::GRAVITY;
    use approx::assert_relative_eq;

    fn still(n: usize, rate: f64) -> Vec<ImuSample> {
        (0..n)
            .map(|k| ImuSample::new(k as f64 / rate, Vec3::zeros(), Vec3::new(0.0, 0.0, GRAVITY)))
            .collect()
    }

    #[test]
    fn ideal_spec_is_identity() {
        let s = still(100, 200.0);
        assert_eq!(corrupt(&s, &SensorErrorSpec::ideal()), s);
    }

    #[test]
    fn same_seed_same_stream() {
        let s = still(500, 200.0);
        let spec = SensorErrorSpec::icm20602(11);
        assert_eq!(corrupt(&s, &spec), corrupt(&s, &spec));
        assert_ne!(corrupt(&s, &spec), corrupt(&s, &SensorErrorSpec { seed: 12, ..spec }));
    }

    #[test]
    fn bias_magnitudes_follow_spec() {
        let (r, _) = SensorErrorRealization::draw(&SensorErrorSpec::icm20602(5));
        let gb = 200.0 * DEG / 3600.0;
        for i in 0..3 {
            assert_relative_eq!(r.gyro_bias[i].abs(), gb, epsilon = 1e-18);
            assert_relative_eq!(r.accel_bias[i].abs(), 0.01, epsilon = 1e-18);
        }
    }

    #[test]
    fn gyro_white_noise_sigma() {
        let rate = 200.0;
        let n = 1_000_000;
        let spec = SensorErrorSpec { arw_deg_rt_h: 0.24, seed: 3, ..SensorErrorSpec::ideal() };
        let out = corrupt(&still(n, rate), &spec);
        let expected = 0.24 * DEG / 60.0 * rate.sqrt();
        for axis in 0..3 {
            let mean = out.iter().map(|s| s.gyro[axis]).sum::<f64>() / n as f64;
            let var = out.iter().map(|s| (s.gyro[axis] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((var.sqrt() / expected - 1.0).abs() < 0.02);
        }
    }
}
