use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rigid-body and motor state. Position and velocity in the world NED frame,
/// ZYX Euler angles `(φ, θ, ψ)`, body rates `(p, q, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadState {
    pub pos: [f64; 3],
    pub vel: [f64; 3],
    pub euler: [f64; 3],
    pub rates: [f64; 3],
    pub motors: [f64; 4],
}

impl QuadState {
    pub fn hover(pos: [f64; 3], omega_hover: f64) -> Self {
        Self { pos, motors: [omega_hover; 4], ..Default::default() }
    }
}

/// Values of all disturbance channels at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DisturbanceSample {
    /// World-frame force, N.
    pub force: [f64; 3],
    /// Body-frame torque, N·m.
    pub torque: [f64; 3],
    /// Additive offset on the commanded angular acceleration, rad/s².
    pub nu_ang: [f64; 3],
    /// Additive offset on the commanded translational acceleration, m/s².
    pub nu_acc: [f64; 3],
}

/// A step change: from `t` on, the channels take the given values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceStep {
    pub t: f64,
    #[serde(default)]
    pub force: [f64; 3],
    #[serde(default)]
    pub torque: [f64; 3],
    #[serde(default)]
    pub nu_ang: [f64; 3],
    #[serde(default)]
    pub nu_acc: [f64; 3],
}

/// Piecewise-constant disturbance schedule, zero before the first step.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DisturbanceInput {
    #[serde(default)]
    pub steps: Vec<DisturbanceStep>,
}

impl DisturbanceInput {
    pub fn new(steps: Vec<DisturbanceStep>) -> Result<Self> {
        let d = Self { steps };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.steps {
            let all = s.force.iter().chain(&s.torque).chain(&s.nu_ang).chain(&s.nu_acc);
            if !(s.t >= 0.0 && s.t.is_finite()) || all.clone().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("disturbance steps need finite values and t >= 0".into()));
            }
        }
        if self.steps.windows(2).any(|w| w[1].t < w[0].t) {
            return Err(Error::InvalidParameter("disturbance steps must be sorted by time".into()));
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> DisturbanceSample {
        // Small slack so that a step at t lands on the sample taken at t.
        match self.steps.iter().rev().find(|s| s.t <= t + 1e-9) {
            Some(s) => DisturbanceSample { force: s.force, torque: s.torque, nu_ang: s.nu_ang, nu_acc: s.nu_acc },
            None => DisturbanceSample::default(),
        }
    }

    /// Same schedule with every value multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let sc = |v: [f64; 3]| v.map(|x| x * k);
        Self {
            steps: self
                .steps
                .iter()
                .map(|s| DisturbanceStep { t: s.t, force: sc(s.force), torque: sc(s.torque), nu_ang: sc(s.nu_ang), nu_acc: sc(s.nu_acc) })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_holds_last_step() {
        let d = DisturbanceInput::new(vec![
            DisturbanceStep { t: 1.0, force: [1.0, 0.0, 0.0], torque: [0.0; 3], nu_ang: [0.0; 3], nu_acc: [0.0; 3] },
            DisturbanceStep { t: 2.0, force: [0.0, 2.0, 0.0], torque: [0.0; 3], nu_ang: [0.0; 3], nu_acc: [0.0; 3] },
        ])
        .unwrap();
        assert_eq!(d.at(0.5).force, [0.0; 3]);
        assert_eq!(d.at(1.0).force, [1.0, 0.0, 0.0]);
        assert_eq!(d.at(5.0).force, [0.0, 2.0, 0.0]);
    }
}
