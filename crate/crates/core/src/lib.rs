//! Wheel-mounted IMU dead reckoning and terrain-aided particle-filter SLAM.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod imu;
pub mod io;
pub mod ins;
pub mod math;
pub mod sim;
pub mod slam;

pub use error::{ConfigError, DataError, InsError, MathError, RunError, SimError, SlamError};
pub use imu::{ImuSample, GRAVITY};
pub use math::{Attitude, Vec3};
