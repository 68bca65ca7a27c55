use serde::{Deserialize, Serialize};

use super::scenario::{MetricSignal, MetricSpec};
use super::trace::{SimTrace, TraceRow};
use crate::error::{Error, Result};

/// Step-response figures of one trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    /// 10–90 % rise time, s.
    pub rise_time: Option<f64>,
    /// Time from the step to the first 90 % crossing, s.
    pub time_to_90: Option<f64>,
    /// Peak excursion past the final value as a fraction of the step size.
    pub overshoot: f64,
    /// Time after which the response stays inside a 2 % band, s.
    pub settling_time: Option<f64>,
}

/// Metrics of one trace for one signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub signal: MetricSignal,
    /// Largest |signal − reference| over the metric windows.
    pub peak_deviation: f64,
    pub peak_time: f64,
    /// Time from the start of the peak's window until the deviation falls
    /// and stays below 10 % of the peak; `None` if it never does.
    pub recovery_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepMetrics>,
}

/// `100·(1 − peak_a/peak_b)`: how much smaller `a` is than `b`, in percent.
pub fn improvement_pct(peak_a: f64, peak_b: f64) -> f64 {
    if peak_b == 0.0 {
        if peak_a == 0.0 { 0.0 } else { f64::NEG_INFINITY }
    } else {
        100.0 * (1.0 - peak_a / peak_b)
    }
}

/// Step metrics for a response `y(t)` moving from `y0` to `y1` at `t_step`.
/// Only samples with `t ≥ t_step` are used.
pub fn step_metrics(t: &[f64], y: &[f64], t_step: f64, y0: f64, y1: f64) -> Result<StepMetrics> {
    if t.len() != y.len() {
        return Err(Error::Dimension("time and signal lengths differ".into()));
    }
    let span = y1 - y0;
    if span == 0.0 {
        return Err(Error::InvalidParameter("step size is zero".into()));
    }
    let idx: Vec<usize> = (0..t.len()).filter(|&i| t[i] >= t_step - 1e-12).collect();
    if idx.is_empty() {
        return Err(Error::InvalidParameter("no samples after the step".into()));
    }
    let frac = |i: usize| (y[i] - y0) / span;
    let first = |level: f64| idx.iter().copied().find(|&i| frac(i) >= level).map(|i| t[i]);
    let (t10, t90) = (first(0.1), first(0.9));
    let rise_time = match (t10, t90) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };
    let overshoot = idx.iter().map(|&i| frac(i) - 1.0).fold(0.0f64, f64::max);
    let outside = idx.iter().copied().rev().find(|&i| (frac(i) - 1.0).abs() > 0.02);
    let settling_time = match outside {
        None => Some(0.0),
        Some(i) if i + 1 < t.len() && i != *idx.last().expect("non-empty") => Some(t[i + 1] - t_step),
        _ => None,
    };
    Ok(StepMetrics { rise_time, time_to_90: t90.map(|v| v - t_step), overshoot, settling_time })
}

fn signal_of(r: &TraceRow, s: MetricSignal) -> (f64, f64) {
    match s {
        MetricSignal::X => (r.pos[0], r.ref_pos[0]),
        MetricSignal::Y => (r.pos[1], r.ref_pos[1]),
        MetricSignal::Z => (r.pos[2], r.ref_pos[2]),
        MetricSignal::Roll => (r.euler[0], r.ref_euler[0]),
        MetricSignal::Pitch => (r.euler[1], r.ref_euler[1]),
        MetricSignal::Yaw => (r.euler[2], r.ref_euler[2]),
    }
}

/// Evaluate the scenario's metric specification on a trace.
pub fn compute_metrics(trace: &SimTrace, spec: &MetricSpec) -> Result<Metrics> {
    let rows = &trace.rows;
    if rows.is_empty() {
        return Err(Error::InvalidParameter("empty trace".into()));
    }
    let t_end = rows.last().expect("non-empty").t;
    let (mut peak, mut peak_time, mut peak_window) = (0.0f64, f64::NAN, spec.windows[0]);
    for w in &spec.windows {
        if w[0] > t_end {
            return Err(Error::InvalidParameter(format!("window starting at {} s is past the end of the trace", w[0])));
        }
        for r in rows.iter().filter(|r| r.t >= w[0] && r.t <= w[1]) {
            let (v, rf) = signal_of(r, spec.signal);
            let dev = (v - rf).abs();
            if dev > peak || peak_time.is_nan() {
                peak = dev;
                peak_time = r.t;
                peak_window = *w;
            }
        }
    }
    let recovery_time = if peak == 0.0 {
        Some(0.0)
    } else {
        let in_w: Vec<&TraceRow> = rows.iter().filter(|r| r.t >= peak_time && r.t <= peak_window[1]).collect();
        let last_above = in_w.iter().rposition(|r| {
            let (v, rf) = signal_of(r, spec.signal);
            (v - rf).abs() > 0.1 * peak
        });
        match last_above {
            Some(i) if i + 1 < in_w.len() => Some(in_w[i + 1].t - peak_window[0]),
            _ => None,
        }
    };
    let step = match spec.step {
        None => None,
        Some(w) => {
            let sel: Vec<&TraceRow> = rows.iter().filter(|r| r.t >= w[0] && r.t <= w[1]).collect();
            let t: Vec<f64> = sel.iter().map(|r| r.t).collect();
            let y: Vec<f64> = sel.iter().map(|r| signal_of(r, spec.signal).0).collect();
            let before = rows.iter().rev().find(|r| r.t < w[0]).unwrap_or(&rows[0]);
            let y0 = signal_of(before, spec.signal).0;
            let y1 = sel.last().map(|r| signal_of(r, spec.signal).1).unwrap_or(y0);
            Some(step_metrics(&t, &y, w[0], y0, y1)?)
        }
    };
    Ok(Metrics { signal: spec.signal, peak_deviation: peak, peak_time, recovery_time, step })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_rise_time_is_ln9_tau() {
        let tau = 1.0;
        let t: Vec<f64> = (0..20001).map(|i| i as f64 * 1e-3).collect();
        let y: Vec<f64> = t.iter().map(|t| 1.0 - (-t / tau).exp()).collect();
        let m = step_metrics(&t, &y, 0.0, 0.0, 1.0).unwrap();
        assert!((m.rise_time.unwrap() - 9f64.ln() * tau).abs() < 2e-3);
        assert!((m.settling_time.unwrap() - 50f64.ln() * tau).abs() < 2e-3);
        assert_eq!(m.overshoot, 0.0);
    }

    #[test]
    fn constant_at_reference() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
        let y = vec![1.0; 100];
        let m = step_metrics(&t, &y, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(m.overshoot, 0.0);
        assert_eq!(m.settling_time, Some(0.0));
    }

    #[test]
    fn non_settling_trace_reports_none() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|t| (20.0 * t).sin()).collect();
        let m = step_metrics(&t, &y, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(m.settling_time, None);
    }

    #[test]
    fn improvement_definition() {
        assert_eq!(improvement_pct(0.5, 1.0), 50.0);
        assert_eq!(improvement_pct(1.0, 1.0), 0.0);
        assert_eq!(improvement_pct(0.0, 0.0), 0.0);
    }
}
