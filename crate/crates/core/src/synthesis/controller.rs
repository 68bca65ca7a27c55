use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsys::{cascade_controller, StateSpaceSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Roll,
    Pitch,
    Yaw,
    X,
    Y,
    Z,
}

/// Which cascade level a controller belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopKind {
    Attitude,
    Guidance,
}

impl std::str::FromStr for LoopKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attitude" => Ok(LoopKind::Attitude),
            "guidance" => Ok(LoopKind::Guidance),
            _ => Err(Error::Parse(format!("unknown loop '{s}' (attitude|guidance)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    Pd,
    HinfFull,
    HinfStructured,
}

impl ControllerKind {
    pub fn label(self) -> &'static str {
        match self {
            ControllerKind::Pd => "pd",
            ControllerKind::HinfFull => "hinf-full",
            ControllerKind::HinfStructured => "hinf-structured",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pd" => Ok(ControllerKind::Pd),
            "hinf-full" => Ok(ControllerKind::HinfFull),
            "hinf-structured" => Ok(ControllerKind::HinfStructured),
            _ => Err(Error::Parse(format!("unknown controller '{s}' (pd|hinf-full|hinf-structured)"))),
        }
    }
}

/// Cascade of two low-order blocks, `K = K_inner·[K_outer, −1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerSet {
    pub axis: Axis,
    pub k_outer: StateSpaceSystem,
    pub k_inner: StateSpaceSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub fs: f64,
}

impl ControllerSet {
    pub fn new(axis: Axis, k_outer: StateSpaceSystem, k_inner: StateSpaceSystem, fs: f64) -> Result<Self> {
        let siso = |k: &StateSpaceSystem| k.n_inputs() == 1 && k.n_outputs() == 1;
        if !siso(&k_outer) || !siso(&k_inner) {
            return Err(Error::Dimension("cascade blocks must be SISO".into()));
        }
        if k_outer.domain().is_discrete() || k_inner.domain().is_discrete() {
            return Err(Error::InvalidParameter("cascade blocks are stored in continuous time".into()));
        }
        if !(fs > 0.0) {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        Ok(Self { axis, k_outer, k_inner, gamma: None, fs })
    }

    /// Static proportional pair `(K_outer, K_inner)`.
    pub fn static_gains(axis: Axis, k_outer: f64, k_inner: f64, fs: f64) -> Result<Self> {
        Self::new(axis, StateSpaceSystem::scalar_gain(k_outer), StateSpaceSystem::scalar_gain(k_inner), fs)
    }

    /// Two-input controller acting on `(r − y, ẏ)`.
    pub fn combined(&self) -> Result<StateSpaceSystem> {
        cascade_controller(&self.k_outer, &self.k_inner)
    }

    pub fn order(&self) -> usize {
        self.k_outer.order() + self.k_inner.order()
    }
}

/// A linear controller for one loop, as stored in controller files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopController {
    pub kind: ControllerKind,
    #[serde(rename = "loop")]
    pub loop_kind: LoopKind,
    pub fs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Combined controller with inputs `(r − y, ẏ)`.
    pub k: StateSpaceSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cascade: Option<ControllerSet>,
}

impl LoopController {
    pub fn from_set(kind: ControllerKind, loop_kind: LoopKind, set: ControllerSet) -> Result<Self> {
        Ok(Self { kind, loop_kind, fs: set.fs, gamma: set.gamma, k: set.combined()?, cascade: Some(set) })
    }

    pub fn from_full(loop_kind: LoopKind, k: StateSpaceSystem, gamma: f64, fs: f64) -> Result<Self> {
        if k.n_inputs() != 2 || k.n_outputs() != 1 {
            return Err(Error::Dimension("controller must map (r - y, y') to one command".into()));
        }
        Ok(Self { kind: ControllerKind::HinfFull, loop_kind, fs, gamma: Some(gamma), k, cascade: None })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: LoopController = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if c.k.n_inputs() != 2 || c.k.n_outputs() != 1 {
            return Err(Error::Parse("controller must have 2 inputs and 1 output".into()));
        }
        if c.k.domain().is_discrete() {
            return Err(Error::Parse("controller must be stored in continuous time".into()));
        }
        if !(c.fs > 0.0 && c.fs.is_finite()) {
            return Err(Error::Parse("fs must be positive".into()));
        }
        Ok(c)
    }
}
