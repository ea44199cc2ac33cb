//! 21-state error-state Kalman filter: position, velocity, attitude, gyro and
//! accelerometer biases and scale factors. Errors are defined as estimate minus
//! truth; the attitude error `φ` satisfies `Ĉ = (I − [φ×]) C`.

use nalgebra::{Matrix3, SMatrix, SVector};

use crate::error::InsError;
use crate::imu::ImuSample;
use crate::math::{skew, Vec3};

use super::config::WheelInsConfig;
use super::state::{vehicle_frame, wheel_spin_rate, wheel_velocity, InsState, SensorErrors};

pub const N: usize = 21;
pub const POS: usize = 0;
pub const VEL: usize = 3;
pub const ATT: usize = 6;
pub const BG: usize = 9;
pub const BA: usize = 12;
pub const SG: usize = 15;
pub const SA: usize = 18;

pub type StateVector = SVector<f64, N>;
pub type Covariance = SMatrix<f64, N, N>;
type Jacobian = SMatrix<f64, 3, N>;

/// Eigenvalues below `−PSD_TOLERANCE · max(1, max diagonal)` count as a loss of
/// positive semi-definiteness.
pub const PSD_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorState {
    pub dx: StateVector,
    pub p: Covariance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UpdateOutcome {
    Applied { innovation: Vec3, mahalanobis2: f64 },
    Rejected { innovation: Vec3, mahalanobis2: f64 },
}

fn set_block(p: &mut Covariance, at: usize, m: &Matrix3<f64>) {
    p.fixed_view_mut::<3, 3>(at, at).copy_from(m);
}

fn set_cross(f: &mut Covariance, row: usize, col: usize, m: &Matrix3<f64>) {
    f.fixed_view_mut::<3, 3>(row, col).copy_from(m);
}

impl ErrorState {
    pub fn new(p: Covariance) -> Self {
        Self { dx: StateVector::zeros(), p }
    }

    /// Initial covariance after static alignment.
    pub fn initial(cfg: &WheelInsConfig) -> Self {
        let mut p = Covariance::zeros();
        let tilt = 0.5f64.to_radians();
        let yaw = 0.01f64.to_radians();
        set_block(&mut p, POS, &(Matrix3::identity() * 1e-6));
        set_block(&mut p, VEL, &(Matrix3::identity() * 1e-4));
        set_block(&mut p, ATT, &Matrix3::from_diagonal(&Vec3::new(tilt * tilt, tilt * tilt, yaw * yaw)));
        set_block(&mut p, BG, &(Matrix3::identity() * cfg.gyro_bias_sigma().powi(2)));
        set_block(&mut p, BA, &(Matrix3::identity() * cfg.accel_bias_ms2.powi(2)));
        set_block(&mut p, SG, &(Matrix3::identity() * (cfg.gyro_scale_ppm * 1e-6).powi(2)));
        set_block(&mut p, SA, &(Matrix3::identity() * (cfg.accel_scale_ppm * 1e-6).powi(2)));
        Self::new(p)
    }

    /// Continuous-time error dynamics for a corrected sample at the given attitude.
    pub fn dynamics(state: &InsState, sample: &ImuSample) -> Covariance {
        let c = state.attitude.matrix();
        let f_n = c * sample.accel;
        let mut f = Covariance::zeros();
        set_cross(&mut f, POS, VEL, &Matrix3::identity());
        set_cross(&mut f, VEL, ATT, &skew(&f_n));
        set_cross(&mut f, VEL, BA, &(-c));
        set_cross(&mut f, VEL, SA, &(-c * Matrix3::from_diagonal(&sample.accel)));
        set_cross(&mut f, ATT, BG, &c);
        set_cross(&mut f, ATT, SG, &(c * Matrix3::from_diagonal(&sample.gyro)));
        f
    }

    /// Propagates the error estimate and its covariance over `dt`.
    pub fn predict(&mut self, state: &InsState, sample: &ImuSample, dt: f64, cfg: &WheelInsConfig) -> Result<(), InsError> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(InsError::Numerical("negative or non-finite dt"));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let fdt = Self::dynamics(state, sample) * dt;
        let phi = Covariance::identity() + fdt + fdt * fdt * 0.5;
        let mut q = Covariance::zeros();
        set_block(&mut q, VEL, &(Matrix3::identity() * (cfg.accel_psd() * dt)));
        set_block(&mut q, ATT, &(Matrix3::identity() * (cfg.gyro_psd() * dt)));
        set_block(&mut q, BG, &(Matrix3::identity() * (cfg.gyro_bias_rw_psd() * dt)));
        set_block(&mut q, BA, &(Matrix3::identity() * (cfg.accel_bias_rw_psd() * dt)));
        self.dx = phi * self.dx;
        self.p = phi * self.p * phi.transpose() + q;
        self.symmetrize();
        if !self.p.iter().all(|v| v.is_finite()) || (0..N).any(|i| self.p[(i, i)] < 0.0) {
            return Err(InsError::CovarianceNotPsd(f64::NAN));
        }
        Ok(())
    }

    /// Wheel-velocity plus non-holonomic update. `raw` is the uncorrected sample of
    /// the current epoch; the observation is the vehicle-frame wheel-centre
    /// velocity predicted by the INS minus `[r·ω_spin, 0, 0]`.
    pub fn update_velocity(
        &mut self,
        state: &InsState,
        errors: &SensorErrors,
        raw: &ImuSample,
        cfg: &WheelInsConfig,
    ) -> Result<UpdateOutcome, InsError> {
        let z = velocity_residual(state, errors, raw, cfg, &StateVector::zeros());
        let h = velocity_jacobian(state, errors, raw, cfg);
        let r = Matrix3::from_diagonal(&Vec3::new(
            cfg.sigma_wheel_velocity.powi(2),
            cfg.sigma_nhc.powi(2),
            cfg.sigma_nhc.powi(2),
        ));
        self.kalman_update(&z, &h, &r, cfg.chi2_gate)
    }

    /// Generic three-row Kalman update in Joseph form with innovation gating.
    pub fn kalman_update(
        &mut self,
        z: &Vec3,
        h: &SMatrix<f64, 3, N>,
        r: &Matrix3<f64>,
        gate: f64,
    ) -> Result<UpdateOutcome, InsError> {
        let innovation = z - h * self.dx;
        let s = h * self.p * h.transpose() + r;
        let s_inv = s.try_inverse().ok_or(InsError::Numerical("singular innovation covariance"))?;
        let mahalanobis2 = (innovation.transpose() * s_inv * innovation)[(0, 0)];
        if !mahalanobis2.is_finite() {
            return Err(InsError::Numerical("non-finite innovation"));
        }
        if mahalanobis2 > gate {
            return Ok(UpdateOutcome::Rejected { innovation, mahalanobis2 });
        }
        let k = self.p * h.transpose() * s_inv;
        if !k.iter().all(|v| v.is_finite()) {
            return Err(InsError::Numerical("non-finite Kalman gain"));
        }
        self.dx += k * innovation;
        let ikh = Covariance::identity() - k * h;
        self.p = ikh * self.p * ikh.transpose() + k * r * k.transpose();
        self.symmetrize();
        self.check_psd()?;
        Ok(UpdateOutcome::Applied { innovation, mahalanobis2 })
    }

    pub fn symmetrize(&mut self) {
        self.p = (self.p + self.p.transpose()) * 0.5;
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.p.symmetric_eigenvalues().min()
    }

    /// Fails when the covariance has a clearly negative eigenvalue.
    pub fn check_psd(&self) -> Result<(), InsError> {
        let scale = (0..N).map(|i| self.p[(i, i)]).fold(1.0, f64::max);
        let min = self.min_eigenvalue();
        if !(min >= -PSD_TOLERANCE * scale) {
            return Err(InsError::CovarianceNotPsd(min));
        }
        Ok(())
    }

    /// Relative asymmetry `‖P − Pᵀ‖ / ‖P‖`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.p.norm();
        if n == 0.0 {
            return 0.0;
        }
        (self.p - self.p.transpose()).norm() / n
    }
}

/// Applies an error vector to the nominal values the way an estimate that is
/// off by `delta` would look.
fn perturbed(state: &InsState, errors: &SensorErrors, delta: &StateVector) -> (InsState, SensorErrors) {
    let v3 = |i: usize| Vec3::new(delta[i], delta[i + 1], delta[i + 2]);
    let mut s = *state;
    s.position += v3(POS);
    s.velocity += v3(VEL);
    s.attitude = state.attitude.rotate_nav(&(-v3(ATT)));
    let e = SensorErrors {
        gyro_bias: errors.gyro_bias + v3(BG),
        accel_bias: errors.accel_bias + v3(BA),
        gyro_scale: errors.gyro_scale + v3(SG),
        accel_scale: errors.accel_scale + v3(SA),
    };
    (s, e)
}

/// Vehicle-frame velocity residual for an estimate perturbed by `delta`.
pub fn velocity_residual(
    state: &InsState,
    errors: &SensorErrors,
    raw: &ImuSample,
    cfg: &WheelInsConfig,
    delta: &StateVector,
) -> Vec3 {
    let (s, e) = perturbed(state, errors, delta);
    let w = e.correct(raw).gyro;
    let center_velocity = s.velocity - s.attitude.rotate(&w.cross(&cfg.lever_arm()));
    let v_vehicle = vehicle_frame(&s.attitude).transpose() * center_velocity;
    let wheel = wheel_velocity(wheel_spin_rate(&s.attitude, &w), cfg.wheel_radius);
    v_vehicle - Vec3::new(wheel, 0.0, 0.0)
}

/// Central-difference Jacobian of the velocity residual.
pub fn velocity_jacobian(state: &InsState, errors: &SensorErrors, raw: &ImuSample, cfg: &WheelInsConfig) -> Jacobian {
    let mut h = Jacobian::zeros();
    for i in VEL..N {
        let eps = match i {
            VEL..=5 => 1e-6,
            ATT..=8 => 1e-7,
            BG..=11 => 1e-7,
            _ => 1e-6,
        };
        let mut d = StateVector::zeros();
        d[i] = eps;
        let plus = velocity_residual(state, errors, raw, cfg, &d);
        d[i] = -eps;
        let minus = velocity_residual(state, errors, raw, cfg, &d);
        h.set_column(i, &((plus - minus) / (2.0 * eps)));
    }
    h
}

/// Removes the estimated errors from the nominal state and resets the estimate.
pub fn feedback(state: &mut InsState, errors: &mut SensorErrors, err: &mut ErrorState) {
    let dx = err.dx;
    let v3 = |i: usize| Vec3::new(dx[i], dx[i + 1], dx[i + 2]);
    state.position -= v3(POS);
    state.velocity -= v3(VEL);
    state.attitude = state.attitude.rotate_nav(&v3(ATT));
    errors.gyro_bias -= v3(BG);
    errors.accel_bias -= v3(BA);
    errors.gyro_scale -= v3(SG);
    errors.accel_scale -= v3(SA);
    err.dx = StateVector::zeros();
}
