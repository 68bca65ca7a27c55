use serde::{Deserialize, Serialize};

use super::controller::{Axis, ControllerKind, ControllerSet, LoopController, LoopKind};
use super::full::{synth_full_order, FullOrderOptions};
use super::modal::design_pd_modal;
use super::plant::{build_generalized_plant, rigid_axis, Channel, GeneralizedPlant};
use super::report::SynthesisReport;
use super::structured::{channel_norms, synth_structured, Structure, StructuredOptions};
use super::weights::{WeightParams, WeightSet};
use crate::error::{Error, Result};
use crate::linsys::StateSpaceSystem;
use crate::vehicle::QuadcopterParams;

/// How the PD baseline of a loop is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PdSpec {
    Gains { k_outer: f64, k_inner: f64 },
    Modal { zeta: f64, wn: f64 },
}

/// Design inputs for one cascade level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopDesign {
    pub weights: WeightParams,
    pub pd: PdSpec,
    /// Lag of the plant seen by this loop. Omitted for the attitude loop,
    /// which uses the vehicle's actuator time constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant_tau: Option<f64>,
}

/// Weights and baselines for both loops of one vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignProfile {
    pub name: String,
    #[serde(default)]
    pub note: String,
    /// Set when values were reconstructed rather than read verbatim from a source.
    #[serde(default)]
    pub reconstructed: bool,
    pub structure: Structure,
    pub starts: usize,
    pub attitude: LoopDesign,
    pub guidance: LoopDesign,
}

impl DesignProfile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let p: DesignProfile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        p.attitude.weights.validate()?;
        p.guidance.weights.validate()?;
        Structure::new(p.structure.outer, p.structure.inner).map_err(|e| Error::Parse(e.to_string()))?;
        if p.starts == 0 {
            return Err(Error::Parse("starts must be at least 1".into()));
        }
        if let Some(t) = p.guidance.plant_tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Parse("plant_tau must be positive".into()));
            }
        } else {
            return Err(Error::Parse("guidance.plant_tau is required".into()));
        }
        Ok(p)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Shipped profiles: `sim` (simulation vehicle) and `exp` (experimental vehicle).
    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "sim" => include_str!("../../presets/design-sim.toml"),
            "exp" => include_str!("../../presets/design-exp.toml"),
            _ => return Err(Error::InvalidParameter(format!("unknown design profile '{name}' (sim|exp)"))),
        };
        Self::from_toml(text)
    }

    /// Profile matching a vehicle preset name.
    pub fn for_vehicle(vehicle: &str) -> Result<Self> {
        match vehicle {
            "enac-exp" => Self::preset("exp"),
            _ => Self::preset("sim"),
        }
    }

    pub fn loop_design(&self, l: LoopKind) -> &LoopDesign {
        match l {
            LoopKind::Attitude => &self.attitude,
            LoopKind::Guidance => &self.guidance,
        }
    }

    /// Lag of the plant seen by loop `l` on vehicle `params`.
    pub fn plant_tau(&self, l: LoopKind, params: &QuadcopterParams) -> f64 {
        match l {
            LoopKind::Attitude => self.attitude.plant_tau.unwrap_or(params.tau_m),
            LoopKind::Guidance => self.guidance.plant_tau.unwrap_or(params.tau_m),
        }
    }

    /// Generalized plant for loop `l`.
    pub fn plant(&self, l: LoopKind, params: &QuadcopterParams) -> Result<GeneralizedPlant> {
        let act = StateSpaceSystem::first_order_lag(self.plant_tau(l, params))?;
        let w = WeightSet::new(self.loop_design(l).weights)?;
        build_generalized_plant(&rigid_axis(), None, &act, &w)
    }

    /// Static PD gains `(K_outer, K_inner)` of loop `l`.
    pub fn pd_gains(&self, l: LoopKind, params: &QuadcopterParams) -> Result<(f64, f64)> {
        match self.loop_design(l).pd {
            PdSpec::Gains { k_outer, k_inner } => Ok((k_outer, k_inner)),
            PdSpec::Modal { zeta, wn } => {
                let act = StateSpaceSystem::first_order_lag(self.plant_tau(l, params))?;
                let m = design_pd_modal(&act, zeta, wn)?;
                Ok((m.k_mu, m.k_omega))
            }
        }
    }

    /// Design one controller and return it with its report.
    pub fn design(
        &self,
        l: LoopKind,
        kind: ControllerKind,
        params: &QuadcopterParams,
        structure: Option<Structure>,
        seed: u64,
    ) -> Result<SynthesisReport> {
        let plant = self.plant(l, params)?;
        let fs = params.fs();
        let axis = match l {
            LoopKind::Attitude => Axis::Roll,
            LoopKind::Guidance => Axis::X,
        };
        let weights = self.loop_design(l).weights;
        let tau = self.plant_tau(l, params);
        let pd = self.pd_gains(l, params)?;
        let norms_of = |k: &StateSpaceSystem| channel_norms(&plant, k, &Channel::ALL);
        let mut report = SynthesisReport {
            method: String::new(),
            loop_kind: l,
            gamma: None,
            gamma_opt: None,
            meets_templates: None,
            regularization: None,
            seed: None,
            starts: None,
            structure: None,
            actuator_tau: tau,
            weights,
            channel_norms: Default::default(),
            controller: LoopController::from_set(ControllerKind::Pd, l, ControllerSet::static_gains(axis, pd.0, pd.1, fs)?)?,
        };
        match kind {
            ControllerKind::Pd => {
                report.method = match self.loop_design(l).pd {
                    PdSpec::Gains { .. } => "pd-gains".into(),
                    PdSpec::Modal { .. } => "pd-modal".into(),
                };
                let norms = norms_of(&report.controller.k)?;
                report.channel_norms = SynthesisReport::norms_map(&norms);
            }
            ControllerKind::HinfFull => {
                let d = synth_full_order(&plant, &FullOrderOptions::default())?;
                let norms = norms_of(&d.k)?;
                report.method = "full-order".into();
                report.gamma = Some(d.gamma);
                report.gamma_opt = Some(d.gamma_opt);
                report.meets_templates = Some(d.gamma <= 1.0);
                report.regularization = d.regularization;
                report.channel_norms = SynthesisReport::norms_map(&norms);
                report.controller = LoopController::from_full(l, d.k, d.gamma, fs)?;
            }
            ControllerKind::HinfStructured => {
                let structure = structure.unwrap_or(self.structure);
                let opts = StructuredOptions { starts: self.starts, seed, warm_start: Some(pd), axis, fs, ..Default::default() };
                let d = synth_structured(&plant, structure, &opts)?;
                report.method = "structured".into();
                report.gamma = Some(d.gamma);
                report.meets_templates = Some(d.meets_templates);
                report.seed = Some(seed);
                report.starts = Some(self.starts);
                report.structure = Some(structure);
                report.channel_norms = SynthesisReport::norms_map(&d.channel_norms);
                let mut set = d.set;
                set.gamma = Some(d.gamma);
                report.controller = LoopController::from_set(ControllerKind::HinfStructured, l, set)?;
            }
        }
        Ok(report)
    }
}
