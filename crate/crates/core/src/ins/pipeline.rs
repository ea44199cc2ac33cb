use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::InsError;
use crate::imu::ImuSample;
use crate::math::{angle_diff, wrap_angle, Vec3};

use super::align::static_align;
use super::config::WheelInsConfig;
use super::ekf::{feedback, ErrorState, UpdateOutcome};
use super::mechanize::mechanize_with_history;
use super::state::{vehicle_heading, vehicle_roll, wheel_spin_rate, InsState, SensorErrors};

/// Motion since the previous increment, emitted every `roll_sample_distance`
/// of travel, with the absolute dead-reckoned pose at that point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdometryIncrement {
    pub t: f64,
    pub delta_s: f64,
    pub delta_heading: f64,
    /// Vehicle roll, i.e. the road bank angle, rad.
    pub roll: f64,
    pub position: [f64; 2],
    pub heading: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InsStats {
    pub samples: u64,
    pub updates: u64,
    pub rejected: u64,
    pub increments: u64,
    /// Largest relative asymmetry seen with covariance verification on.
    pub max_asymmetry: f64,
    /// Smallest covariance eigenvalue seen with covariance verification on;
    /// `+∞` until the first check.
    pub min_eigenvalue: f64,
}

impl Default for InsStats {
    fn default() -> Self {
        Self { samples: 0, updates: 0, rejected: 0, increments: 0, max_asymmetry: 0.0, min_eigenvalue: f64::INFINITY }
    }
}

#[derive(Clone, Copy, Debug)]
struct Track {
    t: f64,
    center: Vector2<f64>,
    heading: f64,
    roll: f64,
}

#[derive(Clone, Debug)]
struct Running {
    state: InsState,
    errors: SensorErrors,
    err: ErrorState,
    prev_raw: ImuSample,
    before_raw: Option<ImuSample>,
    last_update: f64,
    track: Track,
    travelled: f64,
    emitted_heading: f64,
}

#[derive(Clone, Debug)]
enum Phase {
    Aligning(Vec<ImuSample>),
    Running(Box<Running>),
}

/// Sample-by-sample Wheel-INS: alignment, mechanization, periodic velocity
/// updates with feedback, and odometry increments for the SLAM back end.
#[derive(Clone, Debug)]
pub struct WheelIns {
    cfg: WheelInsConfig,
    phase: Phase,
    stats: InsStats,
    verify_covariance: bool,
}

impl WheelIns {
    pub fn new(cfg: WheelInsConfig) -> Result<Self, InsError> {
        cfg.validate()?;
        Ok(Self { cfg, phase: Phase::Aligning(Vec::new()), stats: InsStats::default(), verify_covariance: false })
    }

    /// Checks symmetry and positive semi-definiteness after every prediction as
    /// well as every update. Slow; meant for verification runs.
    pub fn verify_covariance(mut self, on: bool) -> Self {
        self.verify_covariance = on;
        self
    }

    pub fn config(&self) -> &WheelInsConfig {
        &self.cfg
    }

    pub fn stats(&self) -> InsStats {
        self.stats
    }

    pub fn is_aligned(&self) -> bool {
        matches!(self.phase, Phase::Running(_))
    }

    pub fn state(&self) -> Option<&InsState> {
        match &self.phase {
            Phase::Running(r) => Some(&r.state),
            Phase::Aligning(_) => None,
        }
    }

    pub fn sensor_errors(&self) -> Option<&SensorErrors> {
        match &self.phase {
            Phase::Running(r) => Some(&r.errors),
            Phase::Aligning(_) => None,
        }
    }

    pub fn error_state(&self) -> Option<&ErrorState> {
        match &self.phase {
            Phase::Running(r) => Some(&r.err),
            Phase::Aligning(_) => None,
        }
    }

    /// Feeds one raw sample; returns an increment when another sample distance
    /// of travel has been completed.
    pub fn step(&mut self, raw: &ImuSample) -> Result<Option<OdometryIncrement>, InsError> {
        if !raw.is_finite() {
            return Err(InsError::Numerical("non-finite IMU sample"));
        }
        self.stats.samples += 1;
        match &mut self.phase {
            Phase::Aligning(buf) => {
                if let Some(last) = buf.last() {
                    if raw.t <= last.t {
                        return Err(InsError::NonMonotonicTimestamp { previous: last.t, current: raw.t });
                    }
                }
                buf.push(*raw);
                if raw.t - buf[0].t >= self.cfg.align_duration - 1e-9 {
                    let buf = std::mem::take(buf);
                    self.phase = Phase::Running(Box::new(self.initialize(&buf)?));
                }
                Ok(None)
            }
            Phase::Running(run) => {
                let run: &mut Running = run;
                Self::advance(&self.cfg, &mut self.stats, self.verify_covariance, run, raw)
            }
        }
    }

    fn initialize(&self, buf: &[ImuSample]) -> Result<Running, InsError> {
        let (attitude, gyro_bias) = static_align(buf, self.cfg.initial_heading)?;
        let last = *buf.last().expect("alignment buffer is non-empty");
        let [x, y] = self.cfg.initial_position;
        let lever = attitude.rotate(&self.cfg.lever_arm());
        let state = InsState::new(Vec3::new(x, y, 0.0) + lever, Vec3::zeros(), attitude, last.t);
        let errors = SensorErrors { gyro_bias, ..Default::default() };
        let heading = vehicle_heading(&attitude);
        Ok(Running {
            state,
            errors,
            err: ErrorState::initial(&self.cfg),
            prev_raw: last,
            before_raw: buf.len().checked_sub(2).map(|i| buf[i]),
            last_update: last.t,
            track: Track { t: last.t, center: Vector2::new(x, y), heading, roll: vehicle_roll(&attitude) },
            travelled: 0.0,
            emitted_heading: heading,
        })
    }

    fn advance(
        cfg: &WheelInsConfig,
        stats: &mut InsStats,
        verify: bool,
        run: &mut Running,
        raw: &ImuSample,
    ) -> Result<Option<OdometryIncrement>, InsError> {
        let dt = raw.t - run.prev_raw.t;
        if dt <= 0.0 {
            return Err(InsError::NonMonotonicTimestamp { previous: run.prev_raw.t, current: raw.t });
        }
        let nominal = 1.0 / cfg.imu_rate;
        if (dt - nominal).abs() > 0.2 * nominal {
            log::warn!("IMU interval {dt:.6} s deviates from the configured rate");
        }
        let prev = run.errors.correct(&run.prev_raw);
        let cur = run.errors.correct(raw);
        let mid = ImuSample::new(raw.t, (prev.gyro + cur.gyro) * 0.5, (prev.accel + cur.accel) * 0.5);
        run.err.predict(&run.state, &mid, dt, cfg)?;
        let before = run.before_raw.map(|b| run.errors.correct(&b));
        run.state = mechanize_with_history(&run.state, before.as_ref(), &prev, &cur)?;
        run.before_raw = Some(run.prev_raw);
        run.prev_raw = *raw;
        if verify {
            run.err.check_psd()?;
            stats.max_asymmetry = stats.max_asymmetry.max(run.err.asymmetry());
            stats.min_eigenvalue = stats.min_eigenvalue.min(run.err.min_eigenvalue());
        }

        let spin = wheel_spin_rate(&run.state.attitude, &cur.gyro);
        let revolution = if spin.abs() > 1e-9 { std::f64::consts::TAU / spin.abs() } else { f64::INFINITY };
        if raw.t - run.last_update >= cfg.update_interval.min(revolution) - 1e-9 {
            match run.err.update_velocity(&run.state, &run.errors, raw, cfg)? {
                UpdateOutcome::Applied { .. } => {
                    stats.updates += 1;
                    feedback(&mut run.state, &mut run.errors, &mut run.err);
                    // horizontal-plane assumption: the wheel centre stays at zero height
                    let lever_z = run.state.attitude.rotate(&cfg.lever_arm()).z;
                    run.state.position.z = lever_z;
                }
                UpdateOutcome::Rejected { mahalanobis2, .. } => {
                    stats.rejected += 1;
                    log::debug!("velocity update rejected at t={:.3} (d²={mahalanobis2:.1})", raw.t);
                }
            }
            if verify {
                stats.max_asymmetry = stats.max_asymmetry.max(run.err.asymmetry());
                stats.min_eigenvalue = stats.min_eigenvalue.min(run.err.min_eigenvalue());
            }
            run.last_update = raw.t;
        }

        let c = run.state.wheel_center(&cfg.lever_arm());
        let now = Track {
            t: raw.t,
            center: Vector2::new(c.x, c.y),
            heading: vehicle_heading(&run.state.attitude),
            roll: vehicle_roll(&run.state.attitude),
        };
        // signed along-track progress: stationary jitter averages out instead of accumulating
        let mean_heading = run.track.heading + 0.5 * angle_diff(now.heading, run.track.heading);
        let seg = (now.center - run.track.center).dot(&Vector2::new(mean_heading.cos(), mean_heading.sin()));
        let before = run.travelled;
        let step = cfg.roll_sample_distance;
        let out = if before + seg >= step && seg > 0.0 {
            let frac = ((step - before) / seg).clamp(0.0, 1.0);
            let a = run.track;
            let heading = wrap_angle(a.heading + frac * angle_diff(now.heading, a.heading));
            let center = a.center + (now.center - a.center) * frac;
            let inc = OdometryIncrement {
                t: a.t + frac * (now.t - a.t),
                delta_s: step,
                delta_heading: angle_diff(heading, run.emitted_heading),
                roll: a.roll + frac * (now.roll - a.roll),
                position: [center.x, center.y],
                heading,
            };
            run.emitted_heading = heading;
            run.travelled = before + seg - step;
            stats.increments += 1;
            Some(inc)
        } else {
            run.travelled = before + seg;
            None
        };
        run.track = now;
        Ok(out)
    }
}

/// Runs a whole stream, returning the increments and the final filter.
pub fn run_stream(cfg: WheelInsConfig, samples: &[ImuSample]) -> Result<(Vec<OdometryIncrement>, WheelIns), InsError> {
    let mut ins = WheelIns::new(cfg)?;
    let mut out = Vec::new();
    for s in samples {
        if let Some(inc) = ins.step(s)? {
            out.push(inc);
        }
    }
    Ok((out, ins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imu::GRAVITY;
    use crate::sim::{generate_truth, synthesize_imu, TerrainModel, TrajectorySpec};
    use approx::assert_relative_eq;

    fn ideal_cfg() -> WheelInsConfig {
        WheelInsConfig::default()
    }

    #[test]
    fn stationary_stream_emits_nothing() {
        let samples: Vec<_> = (0..2000)
            .map(|k| ImuSample::new(k as f64 * 0.005, Vec3::zeros(), Vec3::new(0.0, 0.0, GRAVITY)))
            .collect();
        let (incs, ins) = run_stream(ideal_cfg(), &samples).unwrap();
        assert!(incs.is_empty());
        assert!(ins.is_aligned());
    }

    #[test]
    fn straight_run_increments() {
        let spec = TrajectorySpec {
            waypoints: vec![[0.0, 0.0], [10.2, 0.0]],
            static_duration: 1.5,
            ramp_duration: 1.0,
            ..Default::default()
        };
        let truth = generate_truth(&spec, &TerrainModel::flat()).unwrap();
        let (incs, _) = run_stream(ideal_cfg(), &synthesize_imu(&truth, &spec)).unwrap();
        assert_eq!(incs.len(), 20);
        for inc in &incs {
            assert_eq!(inc.delta_s, 0.5);
            assert!(inc.delta_heading.abs() < 1e-9);
        }
        assert_relative_eq!(incs[19].position[0], 10.0, epsilon = 1e-4);
    }

    #[test]
    fn rejects_timestamp_regression() {
        let mut ins = WheelIns::new(ideal_cfg()).unwrap();
        let s = ImuSample::new(1.0, Vec3::zeros(), Vec3::new(0.0, 0.0, GRAVITY));
        ins.step(&s).unwrap();
        assert!(matches!(ins.step(&s), Err(InsError::NonMonotonicTimestamp { .. })));
    }
}
