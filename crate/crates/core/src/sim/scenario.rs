use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indi_control::FlightMode;
use crate::synthesis::ControllerKind;
use crate::vehicle::{DisturbanceInput, DisturbanceStep};

/// `½ρCA` of the wind surrogate, N·s²/m², chosen so that 7.2 m/s gives 3 N.
pub const DEFAULT_DRAG_COEFFICIENT: f64 = 3.0 / (7.2 * 7.2);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub t: f64,
    pub pos: [f64; 3],
}

/// Reference signal of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ReferenceSignal {
    /// Hold the initial position and level attitude.
    Hold,
    /// Attitude jumps from level to `euler` at time `t`.
    AttitudeStep { t: f64, euler: [f64; 3] },
    /// Position set-points, each active from its time on.
    /// Each waypoint becomes the target at its time. Without `speed` the
    /// reference jumps; with it the reference travels there in a straight
    /// line at `speed` m/s.
    Waypoints {
        points: Vec<Waypoint>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        speed: Option<f64>,
    },
}

/// Wind gust step converted to a world-frame force through the drag surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindStep {
    pub t: f64,
    /// m/s
    pub speed: f64,
    /// Unit direction the wind blows towards (world frame).
    pub direction: [f64; 3],
}

/// Gaussian measurement noise, standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub gyro: f64,
    #[serde(default)]
    pub accel: f64,
}

/// Signal a scenario's metrics are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricSignal {
    X,
    Y,
    Z,
    Roll,
    Pitch,
    Yaw,
}

impl MetricSignal {
    pub fn label(self) -> &'static str {
        match self {
            MetricSignal::X => "x",
            MetricSignal::Y => "y",
            MetricSignal::Z => "z",
            MetricSignal::Roll => "roll",
            MetricSignal::Pitch => "pitch",
            MetricSignal::Yaw => "yaw",
        }
    }
}

/// What to measure on each trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub signal: MetricSignal,
    /// Time windows `[t0, t1]` over which the peak deviation is taken.
    pub windows: Vec<[f64; 2]>,
    /// Window for step-response metrics, if the scenario has a step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<[f64; 2]>,
}

/// Default controller family per loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSelection {
    pub attitude: ControllerKind,
    pub guidance: ControllerKind,
}

impl Default for ControllerSelection {
    fn default() -> Self {
        Self { attitude: ControllerKind::Pd, guidance: ControllerKind::Pd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// s
    pub duration: f64,
    pub preset: String,
    #[serde(default)]
    pub mode: FlightMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial_pos: [f64; 3],
    pub reference: ReferenceSignal,
    #[serde(default)]
    pub disturbance: DisturbanceInput,
    #[serde(default)]
    pub wind: Vec<WindStep>,
    #[serde(default = "default_drag")]
    pub drag_coefficient: f64,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub controllers: ControllerSelection,
    /// Multiplier on the effectiveness model inside the inversion.
    #[serde(default = "one")]
    pub model_scale: f64,
    pub metric: MetricSpec,
}

fn default_drag() -> f64 {
    DEFAULT_DRAG_COEFFICIENT
}

fn one() -> f64 {
    1.0
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("scenario '{}': {m}", self.name)));
        if !(self.duration > 0.0 && self.duration <= 3600.0) {
            return bad("duration must be in (0, 3600] s");
        }
        if !self.initial_pos.iter().all(|v| v.is_finite()) {
            return bad("initial position must be finite");
        }
        self.disturbance.validate()?;
        if self.disturbance.steps.iter().any(|s| s.t > self.duration) {
            return bad("disturbance step after the end of the run");
        }
        if !self.wind.is_empty() && !self.disturbance.steps.is_empty() {
            return bad("use either wind steps or disturbance steps, not both");
        }
        for w in &self.wind {
            let n = w.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(w.t >= 0.0 && w.t <= self.duration && w.speed.is_finite() && w.speed >= 0.0 && (n - 1.0).abs() < 1e-6) {
                return bad("wind steps need t within the run, speed >= 0 and a unit direction");
            }
        }
        if self.wind.windows(2).any(|w| w[1].t < w[0].t) {
            return bad("wind steps must be sorted by time");
        }
        if !(self.drag_coefficient >= 0.0 && self.drag_coefficient.is_finite()) {
            return bad("drag coefficient must be finite and >= 0");
        }
        if !(self.noise.gyro >= 0.0 && self.noise.accel >= 0.0 && self.noise.gyro.is_finite() && self.noise.accel.is_finite()) {
            return bad("noise levels must be finite and >= 0");
        }
        if !(self.model_scale > 0.0 && self.model_scale.is_finite()) {
            return bad("model scale must be positive");
        }
        match &self.reference {
            ReferenceSignal::Hold => {}
            ReferenceSignal::AttitudeStep { t, euler } => {
                if !(t.is_finite() && *t >= 0.0) || euler.iter().any(|v| !(v.abs() < 1.0)) {
                    return bad("attitude step needs t >= 0 and angles below 1 rad");
                }
            }
            ReferenceSignal::Waypoints { points, speed } => {
                if speed.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
                    return bad("waypoint speed must be positive");
                }
                if points.is_empty() {
                    return bad("waypoint list is empty");
                }
                if points.iter().any(|p| !(p.t >= 0.0 && p.t.is_finite()) || p.pos.iter().any(|v| !v.is_finite() || v.abs() > 1e4)) {
                    return bad("waypoints must be finite");
                }
                if points.windows(2).any(|w| w[1].t < w[0].t) {
                    return bad("waypoints must be sorted by time");
                }
            }
        }
        let in_run = |w: &[f64; 2]| w[0] >= 0.0 && w[1] > w[0] && w[1] <= self.duration + 1e-9;
        if self.metric.windows.is_empty() || !self.metric.windows.iter().all(in_run) {
            return bad("metric windows must be non-empty and inside the run");
        }
        if let Some(s) = &self.metric.step {
            if !in_run(s) {
                return bad("step window must be inside the run");
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Shipped scenarios: `fig7a`, `fig7b`, `fig10`, `wind-hover`, `wind-waypoints`.
    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "fig7a" => include_str!("../../scenarios/fig7a.toml"),
            "fig7b" => include_str!("../../scenarios/fig7b.toml"),
            "fig10" => include_str!("../../scenarios/fig10.toml"),
            "wind-hover" => include_str!("../../scenarios/wind-hover.toml"),
            "wind-waypoints" => include_str!("../../scenarios/wind-waypoints.toml"),
            _ => return Err(Error::InvalidParameter(format!("unknown scenario '{name}'"))),
        };
        Self::from_toml(text)
    }

    pub const PRESETS: [&'static str; 5] = ["fig7a", "fig7b", "fig10", "wind-hover", "wind-waypoints"];

    /// Disturbance schedule with wind steps mapped to forces.
    pub fn disturbance_schedule(&self) -> Result<DisturbanceInput> {
        if self.wind.is_empty() {
            return Ok(self.disturbance.clone());
        }
        let steps = self
            .wind
            .iter()
            .map(|w| {
                let f = self.drag_coefficient * w.speed * w.speed;
                DisturbanceStep {
                    t: w.t,
                    force: w.direction.map(|d| d * f),
                    torque: [0.0; 3],
                    nu_ang: [0.0; 3],
                    nu_acc: [0.0; 3],
                }
            })
            .collect();
        DisturbanceInput::new(steps)
    }

    /// Position and attitude references at time `t`.
    pub fn reference_at(&self, t: f64) -> ([f64; 3], [f64; 3]) {
        match &self.reference {
            ReferenceSignal::Hold => (self.initial_pos, [0.0; 3]),
            ReferenceSignal::AttitudeStep { t: ts, euler } => {
                (self.initial_pos, if t + 1e-9 >= *ts { *euler } else { [0.0; 3] })
            }
            ReferenceSignal::Waypoints { points, speed } => {
                let Some(i) = points.iter().rposition(|p| p.t <= t + 1e-9) else {
                    return (self.initial_pos, [0.0; 3]);
                };
                let to = points[i].pos;
                let Some(v) = speed else {
                    return (to, [0.0; 3]);
                };
                // Transits are chained: the previous leg's start point is where
                // the reference was when this waypoint became active.
                let from = if i == 0 { self.initial_pos } else { self.reference_at(points[i].t - 1e-6).0 };
                let d: Vec<f64> = (0..3).map(|k| to[k] - from[k]).collect();
                let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                let frac = if len == 0.0 { 1.0 } else { ((t - points[i].t) * v / len).clamp(0.0, 1.0) };
                ([from[0] + frac * d[0], from[1] + frac * d[1], from[2] + frac * d[2]], [0.0; 3])
            }
        }
    }

    /// Number of samples including the initial one.
    pub fn n_samples(&self, fs: f64) -> usize {
        (self.duration * fs).round() as usize + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_scenarios_round_trip() {
        for name in Scenario::PRESETS {
            let s = Scenario::preset(name).unwrap();
            assert_eq!(Scenario::from_toml(&s.to_toml().unwrap()).unwrap(), s, "{name}");
        }
    }

    #[test]
    fn wind_surrogate_maps_reference_speed_to_three_newtons() {
        let mut s = Scenario::preset("wind-hover").unwrap();
        s.wind = vec![WindStep { t: 1.0, speed: 7.2, direction: [1.0, 0.0, 0.0] }];
        let d = s.disturbance_schedule().unwrap();
        assert!((d.at(2.0).force[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn waypoint_reference_is_piecewise_constant() {
        let mut s = Scenario::preset("fig10").unwrap();
        s.reference = ReferenceSignal::Waypoints {
            points: vec![Waypoint { t: 1.0, pos: [2.0, 0.0, 0.0] }, Waypoint { t: 3.0, pos: [-2.0, 0.0, 0.0] }],
            speed: None,
        };
        assert_eq!(s.reference_at(0.5).0, s.initial_pos);
        assert_eq!(s.reference_at(1.0).0, [2.0, 0.0, 0.0]);
        assert_eq!(s.reference_at(5.0).0, [-2.0, 0.0, 0.0]);
    }

    #[test]
    fn waypoint_transit_at_speed() {
        let mut s = Scenario::preset("fig10").unwrap();
        s.initial_pos = [0.0; 3];
        s.reference = ReferenceSignal::Waypoints {
            points: vec![Waypoint { t: 1.0, pos: [2.0, 0.0, 0.0] }, Waypoint { t: 2.0, pos: [2.0, 2.0, 0.0] }],
            speed: Some(1.0),
        };
        assert_eq!(s.reference_at(1.5).0, [0.5, 0.0, 0.0]);
        // Second leg starts from where the first transit had got to.
        let p = s.reference_at(2.5).0;
        let r5 = 5f64.sqrt();
        assert!((p[0] - (1.0 + 0.5 / r5)).abs() < 1e-5 && (p[1] - 1.0 / r5).abs() < 1e-5, "{p:?}");
        assert_eq!(s.reference_at(10.0).0, [2.0, 2.0, 0.0]);
    }

    #[test]
    fn rejects_unsorted_waypoints() {
        let mut s = Scenario::preset("fig10").unwrap();
        s.reference = ReferenceSignal::Waypoints {
            points: vec![Waypoint { t: 3.0, pos: [0.0; 3] }, Waypoint { t: 1.0, pos: [0.0; 3] }],
            speed: None,
        };
        assert!(s.validate().is_err());
    }
}
