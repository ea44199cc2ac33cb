use crate::error::InsError;
use crate::imu::ImuSample;
use crate::math::{Attitude, Vec3};

use super::state::vehicle_heading;

/// Per-axis accelerometer spread above which the data is not stationary, m/s².
pub const MOTION_ACCEL_STD: f64 = 2.0;
/// Mean angular rate above which the wheel is considered turning, rad/s.
pub const MOTION_GYRO_RATE: f64 = 0.05;

/// Levels the IMU from the mean specific force of stationary data and takes
/// the mean angular rate as the gyro bias. Heading is not observable and is
/// set so that the vehicle heading equals `heading`.
pub fn static_align(samples: &[ImuSample], heading: f64) -> Result<(Attitude, Vec3), InsError> {
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(f), Some(l)) if samples.len() >= 2 => (f, l),
        _ => return Err(InsError::AlignmentFailed("need at least two samples".into())),
    };
    if last.t - first.t < 1.0 - 1e-9 {
        return Err(InsError::AlignmentFailed(format!(
            "{:.3} s of data, at least 1 s is required",
            last.t - first.t
        )));
    }
    let n = samples.len() as f64;
    let mean_f = samples.iter().map(|s| s.accel).sum::<Vec3>() / n;
    let mean_w = samples.iter().map(|s| s.gyro).sum::<Vec3>() / n;
    let var_f = samples.iter().map(|s| (s.accel - mean_f).component_mul(&(s.accel - mean_f))).sum::<Vec3>() / n;
    if var_f.iter().any(|v| v.sqrt() > MOTION_ACCEL_STD) || mean_w.norm() > MOTION_GYRO_RATE {
        return Err(InsError::AlignmentFailed("motion detected in alignment window".into()));
    }
    if !(mean_f.norm() > 1.0) {
        return Err(InsError::AlignmentFailed("specific force too small to level".into()));
    }
    let roll = mean_f.y.atan2(mean_f.z);
    let pitch = (-mean_f.x).atan2(mean_f.y.hypot(mean_f.z));
    let level = Attitude::from_euler(roll, pitch, 0.0);
    let turn = heading - vehicle_heading(&level);
    Ok((level.rotate_nav(&(Vec3::z() * turn)), mean_w))
}
