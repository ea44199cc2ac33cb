//! Rotation, angle and small statistics helpers shared by the filters.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use crate::error::MathError;

pub type Vec3 = Vector3<f64>;

/// Body-to-navigation rotation stored as a unit quaternion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Attitude(pub UnitQuaternion<f64>);

impl Default for Attitude {
    fn default() -> Self {
        Self::identity()
    }
}

impl Attitude {
    pub fn identity() -> Self {
        Self(UnitQuaternion::identity())
    }

    pub fn from_rotation_vector(rv: &Vec3) -> Self {
        Self(UnitQuaternion::from_scaled_axis(*rv))
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        Self(UnitQuaternion::from_matrix(m))
    }

    /// ZYX Euler angles (roll about x, pitch about y, yaw about z).
    pub fn from_euler(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self(UnitQuaternion::from_euler_angles(roll, pitch, yaw))
    }

    pub fn quaternion(&self) -> &UnitQuaternion<f64> {
        &self.0
    }

    /// Direction cosine matrix, body to navigation.
    pub fn matrix(&self) -> Matrix3<f64> {
        self.0.to_rotation_matrix().into_inner()
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn inverse_rotate(&self, v: &Vec3) -> Vec3 {
        self.0.inverse_transform_vector(v)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Attitude) -> Attitude {
        Attitude(self.0 * other.0)
    }

    /// Rotates the body frame by a body-fixed rotation vector (right multiplication).
    pub fn rotate_body(&self, rv: &Vec3) -> Attitude {
        let q = self.0.into_inner() * UnitQuaternion::from_scaled_axis(*rv).into_inner();
        Attitude(UnitQuaternion::new_normalize(q))
    }

    /// Rotates the attitude by a navigation-frame rotation vector (left multiplication).
    pub fn rotate_nav(&self, rv: &Vec3) -> Attitude {
        let q = UnitQuaternion::from_scaled_axis(*rv).into_inner() * self.0.into_inner();
        Attitude(UnitQuaternion::new_normalize(q))
    }

    pub fn norm_error(&self) -> f64 {
        (self.0.into_inner().norm() - 1.0).abs()
    }

    /// Rotation angle between two attitudes in radians.
    pub fn angle_to(&self, other: &Attitude) -> f64 {
        self.0.angle_to(&other.0)
    }
}

/// Integrates a constant body angular rate over `dt` seconds.
pub fn integrate_attitude(att: &Attitude, omega: &Vec3, dt: f64) -> Result<Attitude, MathError> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(MathError::InvalidInput("dt must be positive and finite"));
    }
    if !omega.iter().all(|c| c.is_finite()) {
        return Err(MathError::InvalidInput("angular rate must be finite"));
    }
    Ok(att.rotate_body(&(omega * dt)))
}

/// Skew-symmetric cross-product matrix.
pub fn skew(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    if !a.is_finite() {
        return f64::NAN;
    }
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    // rem_euclid can return exactly TAU for tiny negative inputs
    if w <= -PI {
        w += TAU;
    }
    w
}

/// Signed shortest difference `a − b` on the circle.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// Pearson product-moment correlation of two equally long sequences.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<f64, MathError> {
    if a.len() != b.len() {
        return Err(MathError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(MathError::InvalidInput("need at least two samples"));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let da = x - mean_a;
        let db = y - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return Err(MathError::DegenerateSequence);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Root mean square of a non-empty sequence.
pub fn rms(values: &[f64]) -> Result<f64, MathError> {
    if values.is_empty() {
        return Err(MathError::InvalidInput("rms of an empty sequence"));
    }
    let ss: f64 = values.iter().map(|v| v * v).sum();
    Ok((ss / values.len() as f64).sqrt())
}

/// Rotation about the navigation z-axis.
pub fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation about the x-axis.
pub fn rot_x(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}
