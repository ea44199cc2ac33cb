use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::imu::ImuSample;
use crate::sim::noise::{corrupt, SensorErrorSpec};
use crate::sim::terrain::TerrainModel;
use crate::sim::truth::{generate_truth, synthesize_imu, GroundTruth, TrajectorySpec};

/// Seed of the bump field used by the benchmark circuit.
pub const BENCHMARK_TERRAIN_SEED: u64 = 20;

/// Trajectory plus terrain: everything needed to generate a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub trajectory: TrajectorySpec,
    pub terrain: TerrainModel,
}

/// Rounded 125 m × 83 m rectangle (≈ 400 m per lap) at 5 m/s, starting at the
/// origin heading along +x.
pub fn benchmark_trajectory(laps: u32) -> TrajectorySpec {
    TrajectorySpec {
        waypoints: vec![[-62.5, 0.0], [62.5, 0.0], [62.5, 83.0], [-62.5, 83.0], [-62.5, 0.0]],
        speed: 5.0,
        laps,
        corner_radius: 8.0,
        imu_rate: 200.0,
        wheel_radius: 0.3,
        static_duration: 2.0,
        ramp_duration: 2.0,
        initial_spin: 0.0,
        lever_arm: [0.0; 3],
    }
}

/// 20 Gaussian bank bumps of 1–5° and 10–30 m length scale scattered over the circuit.
pub fn benchmark_terrain(seed: u64) -> Result<TerrainModel, SimError> {
    TerrainModel::random_bumps(
        20,
        [-77.5, -15.0],
        [77.5, 98.0],
        (1f64.to_radians(), 5f64.to_radians()),
        (10.0, 30.0),
        seed,
    )
}

impl Scene {
    /// The default two-lap benchmark.
    pub fn benchmark() -> Self {
        Self {
            trajectory: benchmark_trajectory(2),
            terrain: benchmark_terrain(BENCHMARK_TERRAIN_SEED).expect("benchmark terrain is valid"),
        }
    }

    pub fn flattened(mut self) -> Self {
        self.terrain = TerrainModel::flat();
        self
    }

    pub fn truth(&self) -> Result<GroundTruth, SimError> {
        generate_truth(&self.trajectory, &self.terrain)
    }

    /// Ground truth and the matching sensor stream for one error realization.
    pub fn simulate(&self, errors: &SensorErrorSpec) -> Result<(GroundTruth, Vec<ImuSample>), SimError> {
        errors.validate().map_err(SimError::InvalidSpec)?;
        let truth = self.truth()?;
        let ideal = synthesize_imu(&truth, &self.trajectory);
        Ok((truth, corrupt(&ideal, errors)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_lap_is_about_400_m() {
        let truth = Scene { trajectory: benchmark_trajectory(1), ..Scene::benchmark() }.truth().unwrap();
        assert!((truth.path_length - 400.0).abs() < 5.0, "{}", truth.path_length);
    }

    #[test]
    fn benchmark_terrain_has_signal_on_the_route() {
        let scene = Scene::benchmark();
        let truth = scene.truth().unwrap();
        let max = truth.epochs.iter().map(|e| e.bank.abs()).fold(0.0, f64::max);
        assert!(max > 1f64.to_radians());
        assert!(max < 15f64.to_radians());
    }
}
