use serde::{Deserialize, Serialize};

use super::sensitivity::SensitivitySet;
use crate::error::Result;
use crate::synthesis::{Channel, WeightSet};

/// Worst weighted gain of one channel against the `γ`-scaled template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelCompliance {
    pub channel: Channel,
    pub peak: f64,
    pub peak_omega: f64,
    /// `20·log10(γ/peak)`; negative when the template is violated.
    pub margin_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateCompliance {
    pub gamma: f64,
    pub channels: Vec<ChannelCompliance>,
}

impl TemplateCompliance {
    pub fn satisfied(&self, rel_tol: f64) -> bool {
        self.channels.iter().all(|c| c.peak <= self.gamma * (1.0 + rel_tol))
    }
}

/// Weighted magnitude of `ch` at every grid point of `set`.
pub fn weighted_response(set: &SensitivitySet, weights: &WeightSet, ch: Channel) -> Result<Vec<f64>> {
    set.points
        .iter()
        .map(|p| {
            let w = |s: &crate::linsys::StateSpaceSystem| s.freq_response(p.omega).map(|m| m[(0, 0)]);
            Ok(match ch {
                Channel::RefToError => (w(&weights.we)? * p.s).norm(),
                Channel::DistToError => (w(&weights.we)? * p.s_di * w(&weights.wd)?).norm(),
                Channel::RefToControl => (w(&weights.wu)? * p.ks).norm(),
                Channel::NoiseToOutput => (w(&weights.wn)? * p.s_n).norm(),
            })
        })
        .collect()
}

/// Check each weighted closed-loop channel against `γ` over the grid of `set`.
pub fn template_compliance(set: &SensitivitySet, weights: &WeightSet, gamma: f64) -> Result<TemplateCompliance> {
    let mut channels = Vec::with_capacity(4);
    for ch in Channel::ALL {
        let mags = weighted_response(set, weights, ch)?;
        let (i, peak) = mags
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        channels.push(ChannelCompliance {
            channel: ch,
            peak,
            peak_omega: set.points[i].omega,
            margin_db: 20.0 * (gamma / peak).log10(),
        });
    }
    Ok(TemplateCompliance { gamma, channels })
}
