//! End-to-end runs on simulated data: Wheel-INS baseline against Wheel-SLAM.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::RunError;
use crate::eval::{evaluate, improvement_percent, summarize, truth_points, Metrics, Summary, TrajectoryPoint, TruthPoint};
use crate::ins::{run_stream, OdometryIncrement, WheelIns};
use crate::sim::GroundTruth;
use crate::slam::{run_slam, Pose2D, SlamFilter};

/// The dead-reckoned trajectory carried by the increments.
pub fn ins_trajectory(increments: &[OdometryIncrement]) -> Vec<TrajectoryPoint> {
    increments
        .iter()
        .map(|i| TrajectoryPoint { t: i.t, x: i.position[0], y: i.position[1], heading: i.heading })
        .collect()
}

pub fn slam_trajectory(poses: &[(f64, Pose2D)]) -> Vec<TrajectoryPoint> {
    poses.iter().map(|(t, p)| TrajectoryPoint::from_pose(*t, p)).collect()
}

/// Starting pose of the particle filter: the INS initial pose.
pub fn initial_pose(cfg: &RunConfig) -> Pose2D {
    let [x, y] = cfg.ins.initial_position;
    Pose2D::new(x, y, cfg.ins.initial_heading)
}

pub struct Simulated {
    pub truth: GroundTruth,
    pub imu: Vec<crate::imu::ImuSample>,
}

pub fn simulate(cfg: &RunConfig) -> Result<Simulated, RunError> {
    cfg.validate()?;
    let (truth, imu) = cfg.scene()?.simulate(&cfg.sensor_spec())?;
    Ok(Simulated { truth, imu })
}

pub struct Run {
    pub increments: Vec<OdometryIncrement>,
    pub ins: WheelIns,
    pub slam_poses: Vec<(f64, Pose2D)>,
    pub slam: SlamFilter,
}

/// Runs Wheel-INS and Wheel-SLAM over one IMU stream.
pub fn process(cfg: &RunConfig, imu: &[crate::imu::ImuSample]) -> Result<Run, RunError> {
    let (increments, ins) = run_stream(cfg.ins_config(), imu)?;
    let (slam_poses, slam) = run_slam(cfg.slam_config(), initial_pose(cfg), &increments)?;
    Ok(Run { increments, ins, slam_poses, slam })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub ins: Metrics,
    pub slam: Metrics,
    pub horizontal_improvement_percent: f64,
    pub heading_improvement_percent: f64,
    pub loop_closure_updates: u64,
    pub resamples: u64,
}

/// Paired metrics of INS and SLAM against the same truth.
pub fn compare_trajectories(
    seed: u64,
    truth: &[TruthPoint],
    ins: &[TrajectoryPoint],
    slam: &[TrajectoryPoint],
) -> Result<SeedOutcome, RunError> {
    let ins = evaluate(ins, truth)?;
    let slam = evaluate(slam, truth)?;
    Ok(SeedOutcome {
        seed,
        horizontal_improvement_percent: improvement_percent(ins.horizontal_rmse_m, slam.horizontal_rmse_m),
        heading_improvement_percent: improvement_percent(ins.heading_rmse_deg, slam.heading_rmse_deg),
        ins,
        slam,
        loop_closure_updates: 0,
        resamples: 0,
    })
}

/// Simulates, runs and scores the seed in `cfg.seed`.
pub fn run_seed(cfg: &RunConfig) -> Result<SeedOutcome, RunError> {
    let sim = simulate(cfg)?;
    let run = process(cfg, &sim.imu)?;
    let stats = run.slam.stats();
    let mut out = compare_trajectories(
        cfg.seed,
        &truth_points(&sim.truth),
        &ins_trajectory(&run.increments),
        &slam_trajectory(&run.slam_poses),
    )?;
    out.loop_closure_updates = stats.weight_updates;
    out.resamples = stats.resamples;
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub seeds: Vec<u64>,
    pub runs: Vec<SeedOutcome>,
    pub horizontal_improvement_percent: Summary,
    pub heading_improvement_percent: Summary,
    pub ins_horizontal_rmse_m: Summary,
    pub slam_horizontal_rmse_m: Summary,
    pub ins_heading_rmse_deg: Summary,
    pub slam_heading_rmse_deg: Summary,
    /// Fraction of runs where SLAM has the lower horizontal RMSE.
    pub slam_win_rate: f64,
}

/// Seeds `cfg.seed .. cfg.seed + cfg.runs`, processed in parallel; the result
/// does not depend on the number of worker threads.
pub fn compare(cfg: &RunConfig) -> Result<Comparison, RunError> {
    cfg.validate()?;
    let seeds: Vec<u64> = (cfg.seed..cfg.seed + cfg.runs).collect();
    let runs = seeds
        .par_iter()
        .map(|&seed| run_seed(&RunConfig { seed, ..cfg.clone() }))
        .collect::<Result<Vec<_>, _>>()?;
    let pick = |f: fn(&SeedOutcome) -> f64| summarize(&runs.iter().map(f).collect::<Vec<_>>()).expect("at least one run");
    let wins = runs.iter().filter(|r| r.slam.horizontal_rmse_m < r.ins.horizontal_rmse_m).count();
    Ok(Comparison {
        horizontal_improvement_percent: pick(|r| r.horizontal_improvement_percent),
        heading_improvement_percent: pick(|r| r.heading_improvement_percent),
        ins_horizontal_rmse_m: pick(|r| r.ins.horizontal_rmse_m),
        slam_horizontal_rmse_m: pick(|r| r.slam.horizontal_rmse_m),
        ins_heading_rmse_deg: pick(|r| r.ins.heading_rmse_deg),
        slam_heading_rmse_deg: pick(|r| r.slam.heading_rmse_deg),
        slam_win_rate: wins as f64 / runs.len() as f64,
        seeds,
        runs,
    })
}
