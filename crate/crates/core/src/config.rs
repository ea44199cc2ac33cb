//! Flat `key = value` run configuration covering the simulator, the INS, the
//! particle filter and file locations.

use std::path::{Path, PathBuf};

use crate::error::ConfigError;
use crate::ins::WheelInsConfig;
use crate::sim::{benchmark_terrain, Scene, SensorErrorSpec, TerrainModel, TrajectorySpec, BENCHMARK_TERRAIN_SEED};
use crate::slam::{SlamConfig, WeightRule};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Seeds the sensor-error draw and the particle filter.
    pub seed: u64,
    /// Number of seeds aggregated by `compare`.
    pub runs: u64,
    pub ins: WheelInsConfig,
    pub slam: SlamConfig,
    pub sensor: SensorErrorSpec,
    pub trajectory: TrajectorySpec,
    pub terrain_seed: u64,
    pub flat_terrain: bool,
    pub imu_path: Option<PathBuf>,
    pub truth_path: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scene = Scene::benchmark();
        Self {
            seed: 0,
            runs: 20,
            ins: WheelInsConfig::default(),
            slam: SlamConfig::default(),
            sensor: SensorErrorSpec::icm20602_uncalibrated(0),
            trajectory: scene.trajectory,
            terrain_seed: BENCHMARK_TERRAIN_SEED,
            flat_terrain: false,
            imu_path: None,
            truth_path: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

type Parsed<T> = Result<T, String>;

fn parse_f64(v: &str) -> Parsed<f64> {
    let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    if x.is_finite() { Ok(x) } else { Err("value must be finite".into()) }
}
fn parse_deg(v: &str) -> Parsed<f64> {
    parse_f64(v).map(f64::to_radians)
}
fn parse_u64(v: &str) -> Parsed<u64> {
    v.parse().map_err(|_| format!("`{v}` is not a non-negative integer"))
}
fn parse_usize(v: &str) -> Parsed<usize> {
    v.parse().map_err(|_| format!("`{v}` is not a non-negative integer"))
}
fn parse_u32(v: &str) -> Parsed<u32> {
    v.parse().map_err(|_| format!("`{v}` is not a non-negative integer"))
}
fn parse_bool(v: &str) -> Parsed<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{v}` is not a boolean")),
    }
}
fn parse_vec(v: &str, n: usize) -> Parsed<Vec<f64>> {
    let xs = v.split([',', ' ']).filter(|s| !s.is_empty()).map(parse_f64).collect::<Parsed<Vec<_>>>()?;
    if xs.len() == n { Ok(xs) } else { Err(format!("expected {n} numbers, found {}", xs.len())) }
}
fn parse_f2(v: &str) -> Parsed<[f64; 2]> {
    parse_vec(v, 2).map(|x| [x[0], x[1]])
}
fn parse_f3(v: &str) -> Parsed<[f64; 3]> {
    parse_vec(v, 3).map(|x| [x[0], x[1], x[2]])
}
fn parse_points(v: &str) -> Parsed<Vec<[f64; 2]>> {
    v.split(';').filter(|s| !s.trim().is_empty()).map(parse_f2).collect()
}
fn parse_path(v: &str) -> Parsed<Option<PathBuf>> {
    Ok(if v.is_empty() { None } else { Some(PathBuf::from(v)) })
}
fn parse_dir(v: &str) -> Parsed<PathBuf> {
    if v.is_empty() { Err("path must not be empty".into()) } else { Ok(PathBuf::from(v)) }
}
fn parse_rule(v: &str) -> Parsed<WeightRule> {
    match v {
        "coefficient_rms" => Ok(WeightRule::CoefficientRms),
        "residual_rms" => Ok(WeightRule::ResidualRms),
        _ => Err(format!("`{v}` is not one of coefficient_rms, residual_rms")),
    }
}

fn show_f64(x: &f64) -> String {
    format!("{x:?}")
}
fn show_deg(x: &f64) -> String {
    format!("{:?}", x.to_degrees())
}
fn show_int<T: ToString>(x: &T) -> String {
    x.to_string()
}
fn show_arr(x: &[f64]) -> String {
    x.iter().map(show_f64).collect::<Vec<_>>().join(", ")
}
fn show_points(x: &[[f64; 2]]) -> String {
    x.iter().map(|p| show_arr(p)).collect::<Vec<_>>().join("; ")
}
fn show_path(x: &Option<PathBuf>) -> String {
    x.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}
fn show_dir(x: &Path) -> String {
    x.display().to_string()
}
fn show_rule(x: &WeightRule) -> String {
    match x {
        WeightRule::CoefficientRms => "coefficient_rms".into(),
        WeightRule::ResidualRms => "residual_rms".into(),
    }
}

macro_rules! keys {
    ($( $key:literal => $($field:ident).+ : $parse:ident / $show:ident ),* $(,)?) => {
        /// Every recognised key, in the order written by [`RunConfig::to_text`].
        pub const KEYS: &[&str] = &[$($key),*];

        impl RunConfig {
            /// Sets one key from its textual value.
            pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
                let invalid = |message: String| ConfigError::InvalidValue { key: key.to_string(), message };
                match key {
                    $($key => self.$($field).+ = $parse(value).map_err(invalid)?,)*
                    _ => return Err(ConfigError::UnknownKey(key.to_string())),
                }
                Ok(())
            }

            /// All keys with their current values.
            pub fn entries(&self) -> Vec<(&'static str, String)> {
                vec![$(($key, $show(&self.$($field).+))),*]
            }
        }
    };
}

keys! {
    "seed" => seed: parse_u64 / show_int,
    "runs" => runs: parse_u64 / show_int,
    "imu_path" => imu_path: parse_path / show_path,
    "truth_path" => truth_path: parse_path / show_path,
    "out_dir" => out_dir: parse_dir / show_dir,
    "terrain.seed" => terrain_seed: parse_u64 / show_int,
    "terrain.flat" => flat_terrain: parse_bool / show_int,
    "trajectory.waypoints" => trajectory.waypoints: parse_points / show_points,
    "trajectory.speed" => trajectory.speed: parse_f64 / show_f64,
    "trajectory.laps" => trajectory.laps: parse_u32 / show_int,
    "trajectory.corner_radius" => trajectory.corner_radius: parse_f64 / show_f64,
    "trajectory.imu_rate" => trajectory.imu_rate: parse_f64 / show_f64,
    "trajectory.wheel_radius" => trajectory.wheel_radius: parse_f64 / show_f64,
    "trajectory.static_duration" => trajectory.static_duration: parse_f64 / show_f64,
    "trajectory.ramp_duration" => trajectory.ramp_duration: parse_f64 / show_f64,
    "trajectory.initial_spin_deg" => trajectory.initial_spin: parse_deg / show_deg,
    "trajectory.lever_arm" => trajectory.lever_arm: parse_f3 / show_arr,
    "sensor.gyro_bias_dph" => sensor.gyro_bias_dph: parse_f64 / show_f64,
    "sensor.arw_deg_rt_h" => sensor.arw_deg_rt_h: parse_f64 / show_f64,
    "sensor.accel_bias_ms2" => sensor.accel_bias_ms2: parse_f64 / show_f64,
    "sensor.vrw_ms_rt_h" => sensor.vrw_ms_rt_h: parse_f64 / show_f64,
    "sensor.gyro_scale_ppm" => sensor.gyro_scale_ppm: parse_f64 / show_f64,
    "sensor.accel_scale_ppm" => sensor.accel_scale_ppm: parse_f64 / show_f64,
    "ins.wheel_radius" => ins.wheel_radius: parse_f64 / show_f64,
    "ins.lever_arm" => ins.lever_arm: parse_f3 / show_arr,
    "ins.imu_rate" => ins.imu_rate: parse_f64 / show_f64,
    "ins.arw_deg_rt_h" => ins.arw_deg_rt_h: parse_f64 / show_f64,
    "ins.vrw_ms_rt_h" => ins.vrw_ms_rt_h: parse_f64 / show_f64,
    "ins.gyro_bias_dph" => ins.gyro_bias_dph: parse_f64 / show_f64,
    "ins.accel_bias_ms2" => ins.accel_bias_ms2: parse_f64 / show_f64,
    "ins.gyro_bias_rw_dph_rt_h" => ins.gyro_bias_rw_dph_rt_h: parse_f64 / show_f64,
    "ins.accel_bias_rw_ms2_rt_h" => ins.accel_bias_rw_ms2_rt_h: parse_f64 / show_f64,
    "ins.gyro_scale_ppm" => ins.gyro_scale_ppm: parse_f64 / show_f64,
    "ins.accel_scale_ppm" => ins.accel_scale_ppm: parse_f64 / show_f64,
    "ins.sigma_wheel_velocity" => ins.sigma_wheel_velocity: parse_f64 / show_f64,
    "ins.sigma_nhc" => ins.sigma_nhc: parse_f64 / show_f64,
    "ins.update_interval" => ins.update_interval: parse_f64 / show_f64,
    "ins.align_duration" => ins.align_duration: parse_f64 / show_f64,
    "ins.chi2_gate" => ins.chi2_gate: parse_f64 / show_f64,
    "ins.initial_position" => ins.initial_position: parse_f2 / show_arr,
    "ins.initial_heading_deg" => ins.initial_heading: parse_deg / show_deg,
    "slam.particles" => slam.particles: parse_usize / show_int,
    "slam.cell_size" => slam.cell_size: parse_f64 / show_f64,
    "slam.sigma_distance" => slam.sigma_distance: parse_f64 / show_f64,
    "slam.sigma_heading_deg" => slam.sigma_heading: parse_deg / show_deg,
    "slam.sample_distance" => slam.sample_distance: parse_f64 / show_f64,
    "slam.sequence_length" => slam.sequence_length: parse_f64 / show_f64,
    "slam.corr_threshold" => slam.corr_threshold: parse_f64 / show_f64,
    "slam.window" => slam.window: parse_usize / show_int,
    "slam.min_matches" => slam.min_matches: parse_usize / show_int,
    "slam.resample_ratio" => slam.resample_ratio: parse_f64 / show_f64,
    "slam.exclusion_distance" => slam.exclusion_distance: parse_f64 / show_f64,
    "slam.min_bank_std_deg" => slam.min_bank_std: parse_deg / show_deg,
    "slam.weight_rule" => slam.weight_rule: parse_rule / show_rule,
    "slam.loop_closure" => slam.loop_closure: parse_bool / show_int,
}

impl RunConfig {
    /// Applies `key = value` lines on top of the current values. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: n + 1, message: format!("expected `key = value`, found `{line}`") })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Every key on its own line; parses back to an equal configuration.
    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// INS settings with the increment spacing tied to the particle filter's sample distance.
    pub fn ins_config(&self) -> WheelInsConfig {
        WheelInsConfig { roll_sample_distance: self.slam.sample_distance, ..self.ins.clone() }
    }

    pub fn slam_config(&self) -> SlamConfig {
        SlamConfig { seed: self.seed, ..self.slam.clone() }
    }

    pub fn sensor_spec(&self) -> SensorErrorSpec {
        SensorErrorSpec { seed: self.seed, ..self.sensor }
    }

    pub fn scene(&self) -> Result<Scene, ConfigError> {
        let terrain = if self.flat_terrain {
            TerrainModel::flat()
        } else {
            benchmark_terrain(self.terrain_seed)
                .map_err(|e| ConfigError::InvalidValue { key: "terrain.seed".into(), message: e.to_string() })?
        };
        Ok(Scene { trajectory: self.trajectory.clone(), terrain })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let wrap = |key: &str, e: String| ConfigError::InvalidValue { key: key.into(), message: e };
        self.ins_config().validate().map_err(|e| wrap("ins", e.to_string()))?;
        self.slam.validate().map_err(|e| wrap("slam", e.to_string()))?;
        self.sensor.validate().map_err(|e| wrap("sensor", e))?;
        self.trajectory.validate().map_err(|e| wrap("trajectory", e.to_string()))?;
        if self.runs == 0 {
            return Err(wrap("runs", "must be at least 1".into()));
        }
        Ok(())
    }
}
