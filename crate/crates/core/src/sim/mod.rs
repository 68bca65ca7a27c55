//! Scenario runner, trace export and performance metrics.

mod compare;
mod metrics;
mod run;
mod scenario;
mod trace;

pub use compare::{compare_controllers, Comparison, ComparisonRow};
pub use metrics::{compute_metrics, improvement_pct, step_metrics, Metrics, StepMetrics};
pub use run::{run_scenario, ControllerChoice, MAX_POSITION, MAX_RATE};
pub use scenario::{
    ControllerSelection, MetricSignal, MetricSpec, NoiseConfig, ReferenceSignal, Scenario, Waypoint, WindStep,
    DEFAULT_DRAG_COEFFICIENT,
};
pub use trace::{trace_columns, RunStatus, SimTrace, TraceRow};
