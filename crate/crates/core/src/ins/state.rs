use nalgebra::Matrix3;

use crate::imu::ImuSample;
use crate::math::{Attitude, Vec3};

/// Navigation state of the IMU: position and velocity in the local-level
/// frame (x east, y north, z up) and body-to-navigation attitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InsState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Attitude,
    pub t: f64,
}

impl InsState {
    pub fn new(position: Vec3, velocity: Vec3, attitude: Attitude, t: f64) -> Self {
        Self { position, velocity, attitude, t }
    }

    /// Vehicle frame (forward, left, up) to navigation frame.
    pub fn vehicle_to_nav(&self) -> Matrix3<f64> {
        vehicle_frame(&self.attitude)
    }

    /// Wheel-centre position for an IMU mounted at `lever_arm` (body frame).
    pub fn wheel_center(&self, lever_arm: &Vec3) -> Vec3 {
        self.position - self.attitude.rotate(lever_arm)
    }
}

/// Current estimates of the deterministic sensor errors, removed from raw samples
/// as `(raw − bias) / (1 + scale)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SensorErrors {
    pub gyro_bias: Vec3,
    pub accel_bias: Vec3,
    pub gyro_scale: Vec3,
    pub accel_scale: Vec3,
}

impl SensorErrors {
    pub fn correct(&self, raw: &ImuSample) -> ImuSample {
        let gyro = (raw.gyro - self.gyro_bias).component_div(&self.gyro_scale.add_scalar(1.0));
        let accel = (raw.accel - self.accel_bias).component_div(&self.accel_scale.add_scalar(1.0));
        ImuSample::new(raw.t, gyro, accel)
    }
}

/// Spin axis (body x) expressed in the navigation frame.
fn spin_axis(att: &Attitude) -> Vec3 {
    att.rotate(&Vec3::x())
}

/// Vehicle axes derived from the spin axis, which points to the vehicle's left.
/// Pitch is taken as zero: forward is the horizontal direction normal to the axle.
pub fn vehicle_frame(att: &Attitude) -> Matrix3<f64> {
    let left = spin_axis(att);
    let fwd = left.cross(&Vec3::z());
    let fwd = if fwd.norm() > 1e-12 { fwd.normalize() } else { Vec3::x() };
    let up = fwd.cross(&left);
    Matrix3::from_columns(&[fwd, left, up])
}

/// Road bank angle from the axle tilt, positive when the right side is down.
pub fn vehicle_roll(att: &Attitude) -> f64 {
    spin_axis(att).z.clamp(-1.0, 1.0).asin()
}

/// Vehicle heading, counter-clockwise from the navigation x-axis.
pub fn vehicle_heading(att: &Attitude) -> f64 {
    let a = spin_axis(att);
    // forward = left × up = (a_y, −a_x, 0)
    (-a.x).atan2(a.y)
}

/// Rate of the wheel about its axle relative to the vehicle, removing the part of
/// the body x-rate caused by the vehicle yawing on a banked road.
pub fn wheel_spin_rate(att: &Attitude, gyro: &Vec3) -> f64 {
    let a = spin_axis(att);
    let w_nav = att.rotate(gyro);
    let c2 = 1.0 - a.z * a.z;
    if c2 < 1e-6 {
        return gyro.x;
    }
    (gyro.x - w_nav.z * a.z) / c2
}

/// Forward wheel speed from the axle rate and the wheel radius.
pub fn wheel_velocity(omega_x: f64, radius: f64) -> f64 {
    omega_x * radius
}
