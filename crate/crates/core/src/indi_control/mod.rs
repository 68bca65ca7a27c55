//! Incremental inversion blocks and the cascaded controller runtime.

mod inner;
mod outer;
mod stack;

pub use inner::{angular_accel_from_rates, AngularAccel, InnerIndi, MAX_CONDITION};
pub use outer::{thrust_jacobian, OuterCommand, OuterIndi, TILT_LIMIT};
pub use stack::{ControllerStack, FlightMode, Measurements, References, StackOutput, VirtualLimits};
