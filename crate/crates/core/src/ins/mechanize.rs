use crate::error::InsError;
use crate::imu::{ImuSample, GRAVITY};
use crate::math::Vec3;

use super::state::InsState;

pub fn gravity() -> Vec3 {
    Vec3::new(0.0, 0.0, -GRAVITY)
}

/// Rotation vector over one interval for a rate that is quadratic in time with
/// values `w0`, `wm`, `w1` at the start, middle and end: exact half-interval
/// integrals combined with the two-sample coning correction.
fn rotation_vector(w0: &Vec3, wm: &Vec3, w1: &Vec3, dt: f64) -> Vec3 {
    let d1 = (w0 * 5.0 + wm * 8.0 - w1) * (dt / 24.0);
    let d2 = (w1 * 5.0 + wm * 8.0 - w0) * (dt / 24.0);
    d1 + d2 + d1.cross(&d2) * (2.0 / 3.0)
}

/// Advances the navigation state from `prev` to `cur`, both error-corrected
/// instantaneous samples. `before` is the sample preceding `prev`; when present
/// and evenly spaced, the mid-interval rate comes from a quadratic through the
/// three samples instead of a straight line, which matters for a spinning wheel
/// where the turn rate rotates quickly through the body axes. Attitude uses
/// a coning-corrected rotation vector; velocity and position use the trapezoidal rule.
pub fn mechanize_with_history(
    state: &InsState,
    before: Option<&ImuSample>,
    prev: &ImuSample,
    cur: &ImuSample,
) -> Result<InsState, InsError> {
    let dt = cur.t - prev.t;
    if !(dt > 0.0) || cur.t <= state.t {
        return Err(InsError::NonMonotonicTimestamp { previous: state.t.max(prev.t), current: cur.t });
    }
    if !(prev.is_finite() && cur.is_finite()) {
        return Err(InsError::Numerical("non-finite IMU sample"));
    }
    let w_mid = match before {
        Some(b) if ((prev.t - b.t) - dt).abs() < 0.01 * dt && b.is_finite() => {
            (prev.gyro * 6.0 + cur.gyro * 3.0 - b.gyro) / 8.0
        }
        _ => (prev.gyro + cur.gyro) * 0.5,
    };
    let attitude = state.attitude.rotate_body(&rotation_vector(&prev.gyro, &w_mid, &cur.gyro, dt));
    let a0 = state.attitude.rotate(&prev.accel) + gravity();
    let a1 = attitude.rotate(&cur.accel) + gravity();
    let velocity = state.velocity + (a0 + a1) * (0.5 * dt);
    let position = state.position + (state.velocity + velocity) * (0.5 * dt);
    Ok(InsState { position, velocity, attitude, t: cur.t })
}

/// Two-sample form of [`mechanize_with_history`].
pub fn mechanize(state: &InsState, prev: &ImuSample, cur: &ImuSample) -> Result<InsState, InsError> {
    mechanize_with_history(state, None, prev, cur)
}
