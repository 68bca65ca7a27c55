//! Grey-box estimation of the control effectiveness and motor time constant.

mod estimate;
mod log;
mod synthetic;

pub use estimate::{
    analytic_initialization, build_increments, estimate_motor_speed, estimate_parameters, fit_effectiveness,
    EstimationConfig, EstimationResult, Increments,
};
pub use log::{FlightLog, LOG_COLUMNS};
pub use synthetic::{generate_log, SyntheticLogConfig};
