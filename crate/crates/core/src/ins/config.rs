use serde::{Deserialize, Serialize};

use crate::error::InsError;
use crate::math::Vec3;

/// Tuning of the Wheel-INS filter. Noise terms are in datasheet units and
/// converted on use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WheelInsConfig {
    pub wheel_radius: f64,
    /// IMU offset from the wheel centre, IMU body frame, m.
    pub lever_arm: [f64; 3],
    pub imu_rate: f64,
    /// Angle random walk, °/√h.
    pub arw_deg_rt_h: f64,
    /// Velocity random walk, m/s/√h.
    pub vrw_ms_rt_h: f64,
    /// Gyro bias uncertainty left after static alignment, °/h.
    pub gyro_bias_dph: f64,
    /// Initial accelerometer bias uncertainty, m/s².
    pub accel_bias_ms2: f64,
    /// Gyro bias random-walk density, °/h/√h.
    pub gyro_bias_rw_dph_rt_h: f64,
    /// Accelerometer bias random-walk density, m/s²/√h.
    pub accel_bias_rw_ms2_rt_h: f64,
    /// Initial scale-factor uncertainty, ppm.
    pub gyro_scale_ppm: f64,
    pub accel_scale_ppm: f64,
    /// Forward wheel-velocity observation noise, m/s.
    pub sigma_wheel_velocity: f64,
    /// Lateral and vertical non-holonomic observation noise, m/s.
    pub sigma_nhc: f64,
    /// Longest interval between velocity updates, s. Updates also happen once per
    /// wheel revolution when that is shorter.
    pub update_interval: f64,
    /// Leading stationary data used for alignment, s.
    pub align_duration: f64,
    /// Spacing of emitted odometry increments, m.
    pub roll_sample_distance: f64,
    /// Innovation gate on the squared Mahalanobis distance (3 dof).
    pub chi2_gate: f64,
    pub initial_position: [f64; 2],
    /// Initial vehicle heading, rad, counter-clockwise from the x-axis.
    pub initial_heading: f64,
}

impl Default for WheelInsConfig {
    fn default() -> Self {
        Self {
            wheel_radius: 0.3,
            lever_arm: [0.0; 3],
            imu_rate: 200.0,
            arw_deg_rt_h: 0.24,
            vrw_ms_rt_h: 3.0,
            // residual after static alignment over ~1 s of ICM20602-grade data
            gyro_bias_dph: 20.0,
            accel_bias_ms2: 0.01,
            gyro_bias_rw_dph_rt_h: 10.0,
            accel_bias_rw_ms2_rt_h: 0.01,
            gyro_scale_ppm: 1000.0,
            accel_scale_ppm: 1000.0,
            sigma_wheel_velocity: 0.05,
            sigma_nhc: 0.05,
            update_interval: 1.0,
            align_duration: 1.0,
            roll_sample_distance: 0.5,
            // 99.9 % quantile of χ²(3)
            chi2_gate: 16.266,
            initial_position: [0.0, 0.0],
            initial_heading: 0.0,
        }
    }
}

const DEG: f64 = std::f64::consts::PI / 180.0;

impl WheelInsConfig {
    pub fn validate(&self) -> Result<(), InsError> {
        let fail = |m: &str| Err(InsError::InvalidConfig(m.into()));
        if !(self.wheel_radius > 0.0 && self.wheel_radius.is_finite()) {
            return fail("wheel_radius must be positive");
        }
        if !(self.imu_rate > 0.0 && self.imu_rate.is_finite()) {
            return fail("imu_rate must be positive");
        }
        if !(self.sigma_wheel_velocity > 0.0 && self.sigma_nhc > 0.0) {
            return fail("velocity observation noise must be positive");
        }
        let densities = [
            self.arw_deg_rt_h,
            self.vrw_ms_rt_h,
            self.gyro_bias_dph,
            self.accel_bias_ms2,
            self.gyro_bias_rw_dph_rt_h,
            self.accel_bias_rw_ms2_rt_h,
            self.gyro_scale_ppm,
            self.accel_scale_ppm,
        ];
        if densities.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return fail("noise parameters must be non-negative");
        }
        if !(self.update_interval > 0.0) {
            return fail("update_interval must be positive");
        }
        if !(self.align_duration >= 1.0) {
            return fail("align_duration must cover at least 1 s");
        }
        if !(self.roll_sample_distance > 0.0) {
            return fail("roll_sample_distance must be positive");
        }
        if !(self.chi2_gate > 0.0) {
            return fail("chi2_gate must be positive");
        }
        if !self.lever_arm.iter().chain(&self.initial_position).all(|v| v.is_finite())
            || !self.initial_heading.is_finite()
        {
            return fail("lever arm and initial pose must be finite");
        }
        Ok(())
    }

    pub fn lever_arm(&self) -> Vec3 {
        Vec3::from(self.lever_arm)
    }

    /// Gyro white-noise PSD, rad²/s.
    pub fn gyro_psd(&self) -> f64 {
        (self.arw_deg_rt_h * DEG / 60.0).powi(2)
    }

    /// Accelerometer white-noise PSD, (m/s²)²/Hz.
    pub fn accel_psd(&self) -> f64 {
        (self.vrw_ms_rt_h / 60.0).powi(2)
    }

    pub fn gyro_bias_rw_psd(&self) -> f64 {
        (self.gyro_bias_rw_dph_rt_h * DEG / 3600.0 / 60.0).powi(2)
    }

    pub fn accel_bias_rw_psd(&self) -> f64 {
        (self.accel_bias_rw_ms2_rt_h / 60.0).powi(2)
    }

    pub fn gyro_bias_sigma(&self) -> f64 {
        self.gyro_bias_dph * DEG / 3600.0
    }
}
