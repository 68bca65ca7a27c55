//! Linear time-invariant systems in state-space form.

mod connect;
mod freq;
mod norm;
mod pinv;
mod record;
mod runner;
mod system;
mod tustin;

pub use connect::{
    append, cascade_controller, close_connections, feedback, hstack, interconnect, lft_lower, parallel, series,
    vstack, FeedbackSign, Topology,
};
pub use freq::{sigma_max, FrequencyGrid, Spacing};
pub use norm::hinf_norm;
pub use pinv::{condition_number, pseudo_inverse};
pub use record::SystemRecord;
pub use runner::DiscreteRunner;
pub use system::{Domain, StateSpaceSystem};
pub use tustin::discretize_tustin;

pub(crate) use system::eigenvalues;
