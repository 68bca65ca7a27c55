//! Nonlinear quadcopter model, actuators and measurement filters.

mod dynamics;
mod filter;
mod params;
mod state;

pub use dynamics::{
    actuator_step, dynamics_derivative, effectiveness_matrices, linear_acceleration, rotation_matrix, rotor_wrench,
    rotor_wrench_via_effectiveness, step, RigidDerivative, PITCH_LIMIT,
};
pub use filter::{measurement_filter, MeasurementFilter};
pub use params::{FilterParams, QuadcopterParams, GRAVITY};
pub use state::{DisturbanceInput, DisturbanceSample, DisturbanceStep, QuadState};
