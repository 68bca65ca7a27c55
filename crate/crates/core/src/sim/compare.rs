use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, improvement_pct, Metrics};
use super::run::{run_scenario, ControllerChoice};
use super::scenario::Scenario;
use super::trace::{RunStatus, SimTrace};
use crate::error::{Error, Result};
use crate::vehicle::QuadcopterParams;

/// Per-controller outcome of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub controller: String,
    pub status: RunStatus,
    pub metrics: Option<Metrics>,
    /// Improvement of this controller's peak deviation over the first one, %.
    pub improvement_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub scenario: String,
    pub baseline: String,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn any_diverged(&self) -> bool {
        self.rows.iter().any(|r| !r.status.is_completed())
    }

    /// Improvement of controller `a` over controller `b`, if both completed.
    pub fn pairwise(&self, a: usize, b: usize) -> Option<f64> {
        let pa = self.rows.get(a)?.metrics?.peak_deviation;
        let pb = self.rows.get(b)?.metrics?.peak_deviation;
        Some(improvement_pct(pa, pb))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Metrics table, one row per controller, full precision.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "controller",
            "status",
            "peak_deviation",
            "peak_time",
            "recovery_time",
            "rise_time",
            "time_to_90",
            "overshoot",
            "settling_time",
            "improvement_pct",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let status = match &r.status {
                RunStatus::Completed => "completed",
                RunStatus::Diverged { .. } => "diverged",
                RunStatus::Failed { .. } => "failed",
            };
            let m = r.metrics.as_ref();
            let s = m.and_then(|m| m.step);
            w.write_record([
                r.controller.clone(),
                status.to_string(),
                opt(m.map(|m| m.peak_deviation)),
                opt(m.map(|m| m.peak_time)),
                opt(m.and_then(|m| m.recovery_time)),
                opt(s.and_then(|s| s.rise_time)),
                opt(s.and_then(|s| s.time_to_90)),
                opt(s.map(|s| s.overshoot)),
                opt(s.and_then(|s| s.settling_time)),
                opt(r.improvement_pct),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run one scenario with every controller stack; the first entry is the baseline.
pub fn compare_controllers(
    scenario: &Scenario,
    params: &QuadcopterParams,
    controllers: &[ControllerChoice],
) -> Result<(Comparison, Vec<SimTrace>)> {
    if controllers.len() < 2 {
        return Err(Error::InvalidParameter("a comparison needs at least two controllers".into()));
    }
    let traces: Vec<SimTrace> = controllers
        .par_iter()
        .map(|c| run_scenario(scenario, params, c))
        .collect::<Result<Vec<_>>>()?;
    let metrics: Vec<Option<Metrics>> = traces
        .iter()
        .map(|t| if t.status.is_completed() { compute_metrics(t, &scenario.metric).ok() } else { None })
        .collect();
    let base = metrics[0].map(|m| m.peak_deviation);
    let rows = traces
        .iter()
        .zip(&metrics)
        .map(|(t, m)| ComparisonRow {
            controller: t.controller.clone(),
            status: t.status.clone(),
            metrics: *m,
            improvement_pct: match (m, base) {
                (Some(m), Some(b)) => Some(improvement_pct(m.peak_deviation, b)),
                _ => None,
            },
        })
        .collect();
    Ok((Comparison { scenario: scenario.name.clone(), baseline: controllers[0].label.clone(), rows }, traces))
}
