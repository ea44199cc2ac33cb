//! Wheel-INS: strapdown mechanization of a wheel-mounted IMU aided by the
//! gyro-derived wheel speed and the non-holonomic constraint.

pub mod align;
pub mod config;
pub mod ekf;
pub mod mechanize;
pub mod pipeline;
pub mod state;

pub use align::static_align;
pub use config::WheelInsConfig;
pub use ekf::{feedback, Covariance, ErrorState, UpdateOutcome};
pub use mechanize::{mechanize, mechanize_with_history};
pub use pipeline::{run_stream, InsStats, OdometryIncrement, WheelIns};
pub use state::{vehicle_frame, vehicle_heading, vehicle_roll, wheel_spin_rate, wheel_velocity, InsState, SensorErrors};
