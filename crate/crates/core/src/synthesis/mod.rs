//! Weighting templates, generalized plants and H∞ controller design.

mod controller;
mod full;
mod modal;
mod plant;
mod profile;
mod report;
mod riccati;
mod structured;
mod weights;

pub use controller::{Axis, ControllerKind, ControllerSet, LoopController, LoopKind};
pub use full::{synth_full_order, FullOrderDesign, FullOrderOptions, REGULARIZATION_EPS};
pub use modal::{design_pd_modal, lag_time_constant, pd_closed_loop_poles, ModalDesign};
pub use profile::{DesignProfile, LoopDesign, PdSpec};
pub use plant::{build_generalized_plant, rigid_axis, Channel, GeneralizedPlant};
pub use report::SynthesisReport;
pub use riccati::solve_from_hamiltonian;
pub use structured::{channel_norms, synth_structured, Objective, Structure, StructuredDesign, StructuredOptions};
pub use weights::{make_tracking_weight, WeightParams, WeightSet};
