use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsys::StateSpaceSystem;

/// `We(s) = (s/Ms + ωb) / (s + ωb·εe)`.
pub fn make_tracking_weight(ms: f64, wb: f64, eps_e: f64) -> Result<StateSpaceSystem> {
    if !(ms >= 1.0 && wb > 0.0 && eps_e > 0.0 && eps_e <= 1.0) || !(ms.is_finite() && wb.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tracking weight needs Ms >= 1, wb > 0, 0 < eps_e <= 1 (got {ms}, {wb}, {eps_e})"
        )));
    }
    StateSpaceSystem::from_tf(&[1.0 / ms, wb], &[1.0, wb * eps_e])
}

/// Scalar weighting parameters for one loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightParams {
    /// Peak sensitivity bound.
    pub ms: f64,
    /// Sensitivity crossover, rad/s.
    pub wb: f64,
    /// Low-frequency error bound.
    pub eps_e: f64,
    /// Input-disturbance weight gain.
    pub md: f64,
    /// Use `Wd = Md·We` instead of the static `Wd = Md`.
    #[serde(default)]
    pub wd_follows_we: bool,
    /// Bound on |KS|; the control weight is its inverse.
    pub wu_template: f64,
    /// Static weight on the measured output in the noise channel.
    pub wn: f64,
}

impl WeightParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.md >= 1.0 && self.wu_template > 0.0 && self.wn >= 0.0) {
            return Err(Error::InvalidParameter("need Md >= 1, Wu template > 0, Wn >= 0".into()));
        }
        make_tracking_weight(self.ms, self.wb, self.eps_e).map(|_| ())
    }
}

/// The four weighting templates of the mixed-sensitivity problem.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub params: WeightParams,
    pub we: StateSpaceSystem,
    pub wu: StateSpaceSystem,
    pub wd: StateSpaceSystem,
    pub wn: StateSpaceSystem,
}

impl WeightSet {
    pub fn new(params: WeightParams) -> Result<Self> {
        params.validate()?;
        let we = make_tracking_weight(params.ms, params.wb, params.eps_e)?;
        let wd = if params.wd_follows_we { we.scale_output(params.md) } else { StateSpaceSystem::scalar_gain(params.md) };
        Ok(Self {
            params,
            we,
            wu: StateSpaceSystem::scalar_gain(1.0 / params.wu_template),
            wd,
            wn: StateSpaceSystem::scalar_gain(params.wn),
        })
    }

    /// Replace the static disturbance weight by a shaped one.
    pub fn with_shaped_wd(mut self, wd: StateSpaceSystem) -> Result<Self> {
        if wd.n_inputs() != 1 || wd.n_outputs() != 1 || !wd.is_stable() {
            return Err(Error::InvalidParameter("Wd must be a stable SISO system".into()));
        }
        self.wd = wd;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn high_frequency_gain_is_inverse_ms() {
        let we = make_tracking_weight(2.0, 3.0, 0.01).unwrap();
        assert!((we.d()[(0, 0)] - 0.5).abs() < 1e-15);
        let hf = we.freq_response(1e9).unwrap()[(0, 0)].norm();
        assert!((hf - 0.5).abs() < 1e-6);
    }

    #[test]
    fn dc_gain_is_inverse_eps() {
        let eps = 1e-4;
        let we = make_tracking_weight(2.0, 2.0 * std::f64::consts::PI * 1.8, eps).unwrap();
        let dc = we.freq_response(0.0).unwrap()[(0, 0)].norm();
        assert!((dc * eps - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unit_parameters_give_all_pass() {
        let we = make_tracking_weight(1.0, 5.0, 1.0).unwrap();
        for w in [0.0, 1.0, 5.0, 1e3] {
            assert!((we.freq_response(w).unwrap()[(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn range_violations_rejected() {
        assert!(make_tracking_weight(0.5, 1.0, 0.1).is_err());
        assert!(make_tracking_weight(2.0, -1.0, 0.1).is_err());
        assert!(make_tracking_weight(2.0, 1.0, 0.0).is_err());
    }
}
