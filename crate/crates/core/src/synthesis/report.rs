use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::controller::{LoopController, LoopKind};
use super::plant::Channel;
use super::structured::Structure;
use super::weights::WeightParams;
use crate::error::{Error, Result};

/// Outcome of one synthesis run, written next to the controller file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub method: String,
    #[serde(rename = "loop")]
    pub loop_kind: LoopKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_opt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meets_templates: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<Structure>,
    pub actuator_tau: f64,
    pub weights: WeightParams,
    pub channel_norms: BTreeMap<String, f64>,
    pub controller: LoopController,
}

impl SynthesisReport {
    pub fn norms_map(norms: &[(Channel, f64)]) -> BTreeMap<String, f64> {
        norms.iter().map(|(c, v)| (c.label().to_string(), *v)).collect()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
