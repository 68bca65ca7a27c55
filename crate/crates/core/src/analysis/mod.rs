//! Closed-loop sensitivities, margins and template checks.

mod export;
mod margins;
mod sensitivity;
mod templates;

pub use export::write_sensitivity_csv;
pub use margins::{input_margins, margins, Margins};
pub use sensitivity::{
    closed_loop, closed_loop_sensitivities, inversion_residual, loop_transfer, SensitivityPoint, SensitivitySet, IN_DI,
    IN_DO, IN_N, IN_R, OUT_E, OUT_U, OUT_Y,
};
pub use templates::{template_compliance, weighted_response, ChannelCompliance, TemplateCompliance};
