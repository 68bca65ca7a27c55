use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::controller::{Axis, ControllerSet};
use crate::error::{Error, Result};
use crate::linsys::{eigenvalues, StateSpaceSystem};

/// Static cascade gains from pole placement on the lag-plus-double-integrator plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalDesign {
    pub k_mu: f64,
    pub k_omega: f64,
    /// Actuator time constant the design was computed for.
    pub tau: f64,
    #[serde(skip)]
    pub poles: Vec<Complex64>,
}

/// Time constant of a unity-gain first-order lag.
pub fn lag_time_constant(act: &StateSpaceSystem) -> Result<f64> {
    if act.order() != 1 || act.n_inputs() != 1 || act.n_outputs() != 1 || act.d()[(0, 0)] != 0.0 {
        return Err(Error::InvalidParameter("actuator must be a strictly proper first-order lag".into()));
    }
    let a = act.a()[(0, 0)];
    let dc = -act.c()[(0, 0)] * act.b()[(0, 0)] / a;
    if !(a < 0.0) || (dc - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("actuator must be a stable lag with unit DC gain".into()));
    }
    Ok(-1.0 / a)
}

/// Closed-loop poles of `u = K_Ω(K_μ(r − y) − ẏ)` on `1/(s²(τs + 1))`.
pub fn pd_closed_loop_poles(tau: f64, k_mu: f64, k_omega: f64) -> Vec<Complex64> {
    let coeffs = [1.0 / tau, k_omega / tau, k_omega * k_mu / tau];
    let mut comp = nalgebra::DMatrix::zeros(3, 3);
    comp[(0, 0)] = -coeffs[0];
    comp[(0, 1)] = -coeffs[1];
    comp[(0, 2)] = -coeffs[2];
    comp[(1, 0)] = 1.0;
    comp[(2, 1)] = 1.0;
    let mut p = eigenvalues(&comp);
    p.sort_by(|a, b| a.im.total_cmp(&b.im));
    p
}

/// Place the dominant pair at `(ζ, ωn)`; the third pole follows from τ.
pub fn design_pd_modal(act: &StateSpaceSystem, zeta: f64, wn: f64) -> Result<ModalDesign> {
    if !(zeta > 0.0 && wn > 0.0) {
        return Err(Error::InvalidParameter("damping and natural frequency must be positive".into()));
    }
    let tau = lag_time_constant(act)?;
    // s³ + s²/τ + (K_Ω/τ)s + K_ΩK_μ/τ = (s² + 2ζωn s + ωn²)(s + p3)
    let p3 = 1.0 / tau - 2.0 * zeta * wn;
    if p3 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "placement needs a stable third pole; 1/tau = {:.3} is below 2*zeta*wn = {:.3}",
            1.0 / tau,
            2.0 * zeta * wn
        )));
    }
    let k_omega = tau * (wn * wn + 2.0 * zeta * wn * p3);
    let k_mu = tau * wn * wn * p3 / k_omega;
    Ok(ModalDesign { k_mu, k_omega, tau, poles: pd_closed_loop_poles(tau, k_mu, k_omega) })
}

impl ModalDesign {
    pub fn controller_set(&self, axis: Axis, fs: f64) -> Result<ControllerSet> {
        ControllerSet::static_gains(axis, self.k_mu, self.k_omega, fs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critically_damped_request_gives_real_poles() {
        let act = StateSpaceSystem::first_order_lag(1.0 / 53.94).unwrap();
        let d = design_pd_modal(&act, 1.0, 10.0).unwrap();
        assert!(d.poles.iter().all(|p| p.im.abs() < 1e-6));
    }

    #[test]
    fn requested_pair_is_a_root() {
        let act = StateSpaceSystem::first_order_lag(0.02).unwrap();
        let (zeta, wn) = (0.7, 12.0);
        let d = design_pd_modal(&act, zeta, wn).unwrap();
        let s = Complex64::new(-zeta * wn, wn * (1.0 - zeta * zeta).sqrt());
        let tau = 0.02;
        let q = s * s * s * tau + s * s + s * d.k_omega + d.k_omega * d.k_mu;
        assert!(q.norm() / (s.norm().powi(3) * tau) < 1e-9);
    }

    #[test]
    fn slow_actuator_rejected() {
        let act = StateSpaceSystem::first_order_lag(0.1).unwrap();
        assert!(design_pd_modal(&act, 0.6, 14.0).is_err());
    }
}
