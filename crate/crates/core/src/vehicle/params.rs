use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;

/// Second-order measurement filter `ωn² / (s² + 2ζωn s + ωn²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterParams {
    pub zeta: f64,
    /// rad/s
    pub wn: f64,
}

/// Physical and sampling parameters of the quadcopter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadcopterParams {
    pub name: String,
    /// Free-form provenance note carried with the preset.
    #[serde(default)]
    pub note: String,
    /// kg
    pub mass: f64,
    /// kg·m², principal moments
    pub inertia: [f64; 3],
    /// m, rotor arm along body x
    pub lx: f64,
    /// m, rotor arm along body y
    pub ly: f64,
    /// Thrust coefficient: rotor thrust is K_τ·ω²/2.
    pub k_tau: f64,
    /// Drag-torque coefficient: rotor torque is K_q·ω²/2.
    pub k_q: f64,
    /// kg·m², rotor plus propeller
    pub i_rzz: f64,
    /// s
    pub tau_m: f64,
    /// rad/s
    pub omega_max: f64,
    /// s
    pub ts: f64,
    pub filter: FilterParams,
}

const BEBOP_SIM: &str = include_str!("../../presets/bebop-sim.toml");
const ENAC_EXP: &str = include_str!("../../presets/enac-exp.toml");

impl QuadcopterParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("mass", self.mass),
            ("inertia.x", self.inertia[0]),
            ("inertia.y", self.inertia[1]),
            ("inertia.z", self.inertia[2]),
            ("lx", self.lx),
            ("ly", self.ly),
            ("k_tau", self.k_tau),
            ("k_q", self.k_q),
            ("i_rzz", self.i_rzz),
            ("tau_m", self.tau_m),
            ("omega_max", self.omega_max),
            ("ts", self.ts),
            ("filter.zeta", self.filter.zeta),
            ("filter.wn", self.filter.wn),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.hover_speed() >= self.omega_max {
            return Err(Error::InvalidParameter("hover speed exceeds the motor limit".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: QuadcopterParams = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// One of the shipped presets: `bebop-sim` or `enac-exp`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "bebop-sim" => Self::from_toml(BEBOP_SIM),
            "enac-exp" => Self::from_toml(ENAC_EXP),
            _ => Err(Error::InvalidParameter(format!("unknown preset '{name}' (bebop-sim|enac-exp)"))),
        }
    }

    pub fn fs(&self) -> f64 {
        1.0 / self.ts
    }

    /// Equal motor speed that balances gravity.
    pub fn hover_speed(&self) -> f64 {
        (self.mass * GRAVITY / (2.0 * self.k_tau)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load() {
        for name in ["bebop-sim", "enac-exp"] {
            let p = QuadcopterParams::preset(name).unwrap();
            assert!((p.ts * 500.0 - 1.0).abs() < 1e-12);
            assert!(p.hover_speed() < p.omega_max);
        }
        let sim = QuadcopterParams::preset("bebop-sim").unwrap();
        assert!((sim.tau_m - 1.0 / 53.94).abs() < 1e-12);
        let exp = QuadcopterParams::preset("enac-exp").unwrap();
        assert!((exp.tau_m - 1.0 / 25.65).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_field_rejected() {
        let mut p = QuadcopterParams::preset("bebop-sim").unwrap();
        p.tau_m = 0.0;
        assert!(p.validate().is_err());
    }
}
