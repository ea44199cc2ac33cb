//! Wheel-SLAM: a Rao-Blackwellized particle filter whose particles each carry
//! a terrain (road bank) grid map, with loop closure by roll-sequence matching.

pub mod closure;
pub mod config;
pub mod filter;
pub mod grid;
pub mod particle;
pub mod pose;
pub mod weights;

pub use closure::{check_criteria, correlate, update_weight, LoopClosureEvidence};
pub use config::{SlamConfig, WeightRule};
pub use filter::{run_slam, LoopClosureEvent, SlamFilter, SlamStats, StepSummary};
pub use grid::{Cell, CellIndex, TerrainGrid};
pub use particle::{particle_rng, Particle, ParticleOutcome, RollSample};
pub use pose::Pose2D;
pub use weights::{effective_sample_ratio, estimate, estimate_pose, normalize, resample, systematic_indices};
