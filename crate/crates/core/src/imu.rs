use crate::math::Vec3;

/// Standard gravity magnitude, m/s².
pub const GRAVITY: f64 = 9.80665;

/// One Wheel-IMU epoch: angular rate (rad/s) and specific force (m/s²) in the body frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    pub gyro: Vec3,
    pub accel: Vec3,
}

impl ImuSample {
    pub fn new(t: f64, gyro: Vec3, accel: Vec3) -> Self {
        Self { t, gyro, accel }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.gyro.iter().all(|v| v.is_finite())
            && self.accel.iter().all(|v| v.is_finite())
    }
}

/// Mean sampling rate of a stream, Hz. `None` for fewer than two samples.
pub fn stream_rate(samples: &[ImuSample]) -> Option<f64> {
    let (first, last) = (samples.first()?, samples.last()?);
    if samples.len() < 2 || last.t <= first.t {
        return None;
    }
    Some((samples.len() - 1) as f64 / (last.t - first.t))
}
