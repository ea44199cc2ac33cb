use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::imu::{ImuSample, GRAVITY};
use crate::math::{rot_x, rot_z, Attitude, Vec3};
use crate::sim::route::Route;
use crate::sim::terrain::TerrainModel;

/// Drive description for the simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub waypoints: Vec<[f64; 2]>,
    /// Cruise speed, m/s.
    pub speed: f64,
    pub laps: u32,
    /// Minimum turning radius of the smoothed corners, m.
    pub corner_radius: f64,
    pub imu_rate: f64,
    pub wheel_radius: f64,
    /// Stationary time before the vehicle starts, s.
    pub static_duration: f64,
    /// Raised-cosine acceleration time from rest to cruise speed, s.
    pub ramp_duration: f64,
    /// Wheel spin angle at t = 0, rad.
    pub initial_spin: f64,
    /// IMU offset from the wheel centre, expressed in the IMU body frame, m.
    pub lever_arm: [f64; 3],
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            waypoints: vec![[0.0, 0.0], [100.0, 0.0]],
            speed: 5.0,
            laps: 1,
            corner_radius: 8.0,
            imu_rate: 200.0,
            wheel_radius: 0.3,
            static_duration: 0.0,
            ramp_duration: 0.0,
            initial_spin: 0.0,
            lever_arm: [0.0; 3],
        }
    }
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidSpec(m.into()));
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return bad("speed must be positive");
        }
        if self.laps == 0 {
            return bad("laps must be at least 1");
        }
        if !(self.imu_rate > 0.0 && self.imu_rate.is_finite()) {
            return bad("imu rate must be positive");
        }
        if !(self.wheel_radius > 0.0) {
            return bad("wheel radius must be positive");
        }
        if !(self.static_duration >= 0.0 && self.ramp_duration >= 0.0) {
            return bad("durations must be non-negative");
        }
        for w in self.waypoints.windows(2) {
            if (w[0][0] - w[1][0]).hypot(w[0][1] - w[1][1]) < 1e-9 {
                return bad("consecutive waypoints must be distinct");
            }
        }
        Ok(())
    }

    pub fn lever_arm(&self) -> Vec3 {
        Vec3::from(self.lever_arm)
    }
}

/// Ground-truth state of the wheel centre at one IMU epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthEpoch {
    pub t: f64,
    pub position: Vector2<f64>,
    /// Path tangent heading, counter-clockwise from the navigation x-axis, rad.
    pub heading: f64,
    /// Road bank angle, right side down positive, rad.
    pub bank: f64,
    pub spin_angle: f64,
    pub speed: f64,
    /// Arc length travelled, m.
    pub distance: f64,
    /// Angular velocity of the IMU body in the navigation frame, rad/s.
    pub omega_nav: Vec3,
    pub omega_dot_nav: Vec3,
    /// Wheel-centre acceleration in the navigation frame, m/s².
    pub accel_nav: Vec3,
}

impl TruthEpoch {
    /// Vehicle frame (x forward, y left, z up) to navigation frame.
    pub fn vehicle_to_nav(&self) -> Matrix3<f64> {
        rot_z(self.heading) * rot_x(self.bank)
    }

    /// IMU body frame to navigation frame.
    pub fn attitude(&self) -> Attitude {
        Attitude::from_matrix(&body_to_nav(self.heading, self.bank, self.spin_angle))
    }
}

/// `C_b^n = Rz(ψ)·Rx(β)·C_w^v·Rx(θ)`; the wheel frame has x along the spin axis
/// (vehicle left), y backward and z up, so `C_w^v` is a +90° turn about z.
pub fn body_to_nav(heading: f64, bank: f64, spin: f64) -> Matrix3<f64> {
    rot_z(heading) * rot_x(bank) * rot_z(PI / 2.0) * rot_x(spin)
}

#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub epochs: Vec<TruthEpoch>,
    pub wheel_radius: f64,
    pub rate: f64,
    /// Total commanded path length, m.
    pub path_length: f64,
}

impl GroundTruth {
    pub fn duration(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.t) - self.epochs.first().map_or(0.0, |e| e.t)
    }

    pub fn distance(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.distance)
    }
}

#[derive(Clone, Copy, Debug)]
struct SpeedProfile {
    cruise: f64,
    static_duration: f64,
    ramp: f64,
}

impl SpeedProfile {
    /// (distance, speed, tangential acceleration) at time `t`.
    fn at(&self, t: f64) -> (f64, f64, f64) {
        let tau = t - self.static_duration;
        if tau <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let v = self.cruise;
        if tau < self.ramp {
            let w = PI / self.ramp;
            let s = 0.5 * v * (tau - (w * tau).sin() / w);
            let speed = 0.5 * v * (1.0 - (w * tau).cos());
            let acc = 0.5 * v * w * (w * tau).sin();
            (s, speed, acc)
        } else {
            (0.5 * v * self.ramp + v * (tau - self.ramp), v, 0.0)
        }
    }

    fn end_time(&self, length: f64) -> f64 {
        let ramp_dist = 0.5 * self.cruise * self.ramp;
        if length <= ramp_dist {
            // route shorter than the ramp: bisect the ramp phase
            let (mut lo, mut hi) = (0.0, self.ramp);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if self.at(self.static_duration + mid).0 < length {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return self.static_duration + hi;
        }
        self.static_duration + self.ramp + (length - ramp_dist) / self.cruise
    }
}

struct Kinematics {
    position: Vector2<f64>,
    heading: f64,
    bank: f64,
    spin: f64,
    speed: f64,
    distance: f64,
    omega_nav: Vec3,
    accel_nav: Vec3,
}

fn kinematics(route: &Route, terrain: &TerrainModel, profile: &SpeedProfile, spec: &TrajectorySpec, t: f64) -> Kinematics {
    let (s, v, a_t) = profile.at(t);
    let p = route.point(s);
    let bank = terrain.bank_at(&p.position);
    let tangent = Vector2::new(p.heading.cos(), p.heading.sin());
    let normal = Vector2::new(-tangent.y, tangent.x);
    let yaw_rate = v * p.curvature;
    let bank_rate = terrain.bank_gradient(&p.position).dot(&(tangent * v));
    let spin_rate = v / spec.wheel_radius;
    let c_vn = rot_z(p.heading) * rot_x(bank);
    let omega_nav = Vec3::z() * yaw_rate
        + rot_z(p.heading) * Vec3::x() * bank_rate
        + c_vn * Vec3::y() * spin_rate;
    let acc2 = tangent * a_t + normal * (v * v * p.curvature);
    Kinematics {
        position: p.position,
        heading: p.heading,
        bank,
        spin: spec.initial_spin + s / spec.wheel_radius,
        speed: v,
        distance: s,
        omega_nav,
        accel_nav: Vec3::new(acc2.x, acc2.y, 0.0),
    }
}

/// Samples the drive at the IMU rate, from t = 0 through the end of the route.
pub fn generate_truth(spec: &TrajectorySpec, terrain: &TerrainModel) -> Result<GroundTruth, SimError> {
    spec.validate()?;
    let route = Route::new(&spec.waypoints, spec.corner_radius, spec.laps > 1)?;
    if spec.laps > 1 && !route.is_closed() {
        return Err(SimError::InvalidSpec("repeated laps need a closed route".into()));
    }
    let length = route.lap_length() * spec.laps as f64;
    let profile = SpeedProfile { cruise: spec.speed, static_duration: spec.static_duration, ramp: spec.ramp_duration };
    let t_end = profile.end_time(length);
    let dt = 1.0 / spec.imu_rate;
    let n = (t_end / dt + 1e-9).floor() as usize;
    let h = 1e-4;
    let epochs = (0..=n)
        .map(|k| {
            let t = k as f64 * dt;
            let kin = kinematics(&route, terrain, &profile, spec, t);
            let before = kinematics(&route, terrain, &profile, spec, (t - h).max(0.0));
            let after = kinematics(&route, terrain, &profile, spec, t + h);
            let span = t + h - (t - h).max(0.0);
            TruthEpoch {
                t,
                position: kin.position,
                heading: kin.heading,
                bank: kin.bank,
                spin_angle: kin.spin,
                speed: kin.speed,
                distance: kin.distance,
                omega_nav: kin.omega_nav,
                omega_dot_nav: (after.omega_nav - before.omega_nav) / span,
                accel_nav: kin.accel_nav,
            }
        })
        .collect();
    Ok(GroundTruth { epochs, wheel_radius: spec.wheel_radius, rate: spec.imu_rate, path_length: length })
}

/// Error-free IMU stream for the ground truth, one sample per epoch.
pub fn synthesize_imu(truth: &GroundTruth, spec: &TrajectorySpec) -> Vec<ImuSample> {
    let lever = spec.lever_arm();
    truth
        .epochs
        .iter()
        .map(|e| {
            let c_bn = body_to_nav(e.heading, e.bank, e.spin_angle);
            let r = c_bn * lever;
            let a_imu = e.accel_nav + e.omega_dot_nav.cross(&r) + e.omega_nav.cross(&e.omega_nav.cross(&r));
            let f_nav = a_imu + Vec3::new(0.0, 0.0, GRAVITY);
            ImuSample::new(e.t, c_bn.transpose() * e.omega_nav, c_bn.transpose() * f_nav)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square(laps: u32) -> TrajectorySpec {
        TrajectorySpec {
            waypoints: vec![[0.0, 0.0], [60.0, 0.0], [60.0, 60.0], [0.0, 60.0], [0.0, 0.0]],
            laps,
            corner_radius: 6.0,
            ..Default::default()
        }
    }

    #[test]
    fn straight_line_sample_count() {
        let spec = TrajectorySpec::default();
        let truth = generate_truth(&spec, &TerrainModel::flat()).unwrap();
        // 20 s at 200 Hz: 4000 intervals, 4001 epochs
        assert_eq!(truth.epochs.len(), 4001);
        assert!(truth.epochs.iter().all(|e| e.heading == 0.0));
        let last = truth.epochs.last().unwrap();
        assert_relative_eq!(last.position.x, 100.0, epsilon = 1e-9);
        let imu = synthesize_imu(&truth, &spec);
        assert_eq!(imu.len() - 1, 4000);
    }

    #[test]
    fn closed_loop_returns_to_start() {
        let spec = square(2);
        let truth = generate_truth(&spec, &TerrainModel::flat()).unwrap();
        let first = truth.epochs.first().unwrap();
        let last = truth.epochs.last().unwrap();
        assert!((last.position - first.position).norm() <= spec.speed / spec.imu_rate + 1e-9);
    }

    /// Length by which one smoothed corner of turn `delta` shortens the polygon,
    /// integrating the heading profile with a fine midpoint rule.
    fn corner_shortening(delta: f64, radius: f64) -> f64 {
        let len = 2.0 * radius * delta.abs();
        let n = 200_000;
        let h = len / n as f64;
        let (mut x, mut y) = (0.0, 0.0);
        for i in 0..n {
            let u = (i as f64 + 0.5) * h;
            let theta = delta / len * (u - len / (2.0 * PI) * (2.0 * PI * u / len).sin());
            x += theta.cos() * h;
            y += theta.sin() * h;
        }
        let tangent = x - y * delta.cos() / delta.sin();
        2.0 * tangent - len
    }

    #[test]
    fn path_length_matches_polygon_geometry() {
        let spec = square(1);
        let truth = generate_truth(&spec, &TerrainModel::flat()).unwrap();
        let expected = 240.0 - 4.0 * corner_shortening(PI / 2.0, spec.corner_radius);
        assert!((truth.path_length - expected).abs() / expected < 1e-3);
        let chord: f64 = truth.epochs.windows(2).map(|w| (w[1].position - w[0].position).norm()).sum();
        let remaining = truth.path_length - truth.distance();
        assert!(((chord + remaining) - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn spin_rate_matches_speed() {
        let spec = TrajectorySpec { ramp_duration: 2.0, static_duration: 1.0, ..square(1) };
        let truth = generate_truth(&spec, &TerrainModel::flat()).unwrap();
        for w in truth.epochs.windows(2) {
            let avg_speed = 0.5 * (w[0].speed + w[1].speed);
            let spin = (w[1].spin_angle - w[0].spin_angle) / (w[1].t - w[0].t);
            assert!((spin - avg_speed / spec.wheel_radius).abs() < 1e-3);
        }
        for e in &truth.epochs {
            let body_spin = e.omega_nav.dot(&(e.vehicle_to_nav() * Vec3::y()));
            assert_relative_eq!(body_spin, e.speed / spec.wheel_radius, epsilon = 1e-9);
        }
    }

    #[test]
    fn pure_rolling_on_flat_straight() {
        let spec = TrajectorySpec::default();
        let truth = generate_truth(&spec, &TerrainModel::flat()).unwrap();
        let imu = synthesize_imu(&truth, &spec);
        for s in imu.iter().skip(1).step_by(97) {
            assert_relative_eq!(s.gyro, Vec3::new(spec.speed / spec.wheel_radius, 0.0, 0.0), epsilon = 1e-12);
            assert_relative_eq!(s.accel.norm(), GRAVITY, epsilon = 1e-12);
        }
    }

    #[test]
    fn circular_motion_specific_force() {
        // a long corner sampled at its peak-curvature point behaves like a circle of radius R
        let spec = TrajectorySpec {
            waypoints: vec![[0.0, 0.0], [200.0, 0.0], [200.0, 200.0]],
            corner_radius: 20.0,
            ..Default::default()
        };
        let truth = generate_truth(&spec, &TerrainModel::flat()).unwrap();
        let imu = synthesize_imu(&truth, &spec);
        let route = Route::new(&spec.waypoints, spec.corner_radius, false).unwrap();
        let (idx, kappa) = truth
            .epochs
            .iter()
            .enumerate()
            .map(|(i, e)| (i, route.point(e.distance).curvature))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let lateral = spec.speed * spec.speed * kappa;
        assert_relative_eq!(kappa, 1.0 / 20.0, epsilon = 1e-5);
        assert_relative_eq!(imu[idx].accel.norm(), GRAVITY.hypot(lateral), epsilon = 1e-9);
    }

    #[test]
    fn lever_arm_adds_centripetal_term() {
        let spec = TrajectorySpec { lever_arm: [0.0, 0.1, 0.0], ..Default::default() };
        let truth = generate_truth(&spec, &TerrainModel::flat()).unwrap();
        let imu = synthesize_imu(&truth, &spec);
        let w = spec.speed / spec.wheel_radius;
        // rigid rotation about body x: centripetal acceleration −ω²·r_yz in the body frame
        let s = &imu[1234];
        let gravity_b = truth.epochs[1234].attitude().inverse_rotate(&Vec3::new(0.0, 0.0, GRAVITY));
        assert_relative_eq!(s.accel - gravity_b, Vec3::new(0.0, -w * w * 0.1, 0.0), epsilon = 1e-6);
    }
}
