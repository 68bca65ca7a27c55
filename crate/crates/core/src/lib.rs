pub mod analysis;
pub mod error;
pub mod indi_control;
pub mod linsys;
pub mod sim;
pub mod sysid;
pub mod synthesis;
pub mod vehicle;
