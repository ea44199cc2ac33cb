//! Ground-truth drives over a banked terrain field and the matching Wheel-IMU data.

pub mod noise;
pub mod route;
pub mod scene;
pub mod terrain;
pub mod truth;

pub use noise::{corrupt, SensorErrorRealization, SensorErrorSpec};
pub use route::{Route, RoutePoint};
pub use scene::{benchmark_terrain, benchmark_trajectory, Scene, BENCHMARK_TERRAIN_SEED};
pub use terrain::{Bump, Corrugation, TerrainModel, MAX_BANK_RAD};
pub use truth::{body_to_nav, generate_truth, synthesize_imu, GroundTruth, TrajectorySpec, TruthEpoch};
