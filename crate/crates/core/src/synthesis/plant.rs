use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::weights::WeightSet;
use crate::error::{Error, Result};
use crate::linsys::{append, close_connections, lft_lower, StateSpaceSystem};

/// Exogenous input indices of the generalized plant.
pub const W_R: usize = 0;
pub const W_D: usize = 1;
pub const W_N: usize = 2;
/// Exogenous output indices.
pub const Z_E: usize = 0;
pub const Z_U: usize = 1;
pub const Z_N: usize = 2;

/// One weighted closed-loop transfer of the mixed-sensitivity problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// Reference to weighted tracking error, `We·S`.
    #[serde(rename = "r->z1")]
    RefToError,
    /// Input disturbance to weighted tracking error, `We·S_di·Wd`.
    #[serde(rename = "d->z1")]
    DistToError,
    /// Reference to weighted control, `Wu·KS`.
    #[serde(rename = "r->z2")]
    RefToControl,
    /// Rate-sensor noise to weighted output, `Wn·S_n`.
    #[serde(rename = "n->z3")]
    NoiseToOutput,
}

impl Channel {
    pub const ALL: [Channel; 4] =
        [Channel::RefToError, Channel::DistToError, Channel::RefToControl, Channel::NoiseToOutput];

    /// `(input index, output index)` in the generalized plant.
    pub fn ports(self) -> (usize, usize) {
        match self {
            Channel::RefToError => (W_R, Z_E),
            Channel::DistToError => (W_D, Z_E),
            Channel::RefToControl => (W_R, Z_U),
            Channel::NoiseToOutput => (W_N, Z_N),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Channel::RefToError => "r->z1",
            Channel::DistToError => "d->z1",
            Channel::RefToControl => "r->z2",
            Channel::NoiseToOutput => "n->z3",
        }
    }
}

/// Augmented plant with inputs `[r, d, n, u]` and outputs `[z1, z2, z3, r−y, ẏ+n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPlant {
    pub p: StateSpaceSystem,
    pub n_exo_in: usize,
    pub n_exo_out: usize,
    pub n_meas: usize,
    pub n_ctrl: usize,
}

/// Double integrator with outputs `[y, ẏ]`.
pub fn rigid_axis() -> StateSpaceSystem {
    StateSpaceSystem::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        DMatrix::identity(2, 2),
        DMatrix::zeros(2, 1),
        crate::linsys::Domain::Continuous,
    )
    .expect("static realization")
}

/// Assemble the generalized plant.
///
/// `g` maps the actuated acceleration to `[y, ẏ]`; `act` is the actuator (or
/// inner closed-loop) lag driven by `u + Wd·d`. When `h` is given, the rate
/// measurement passes through it before the noise is added.
pub fn build_generalized_plant(
    g: &StateSpaceSystem,
    h: Option<&StateSpaceSystem>,
    act: &StateSpaceSystem,
    weights: &WeightSet,
) -> Result<GeneralizedPlant> {
    if g.n_inputs() != 1 || g.n_outputs() != 2 {
        return Err(Error::Dimension("plant must have one input and outputs [y, y']".into()));
    }
    if g.d().amax() != 0.0 {
        return Err(Error::InvalidParameter("plant must be strictly proper".into()));
    }
    let siso = |s: &StateSpaceSystem| s.n_inputs() == 1 && s.n_outputs() == 1;
    if !siso(act) || !siso(&weights.we) || !siso(&weights.wd) || !siso(&weights.wu) || !siso(&weights.wn) {
        return Err(Error::Dimension("actuator and weights must be SISO".into()));
    }
    if let Some(h) = h {
        if !siso(h) {
            return Err(Error::Dimension("measurement filter must be SISO".into()));
        }
    }

    let esum = StateSpaceSystem::gain(DMatrix::from_row_slice(1, 2, &[1.0, -1.0]));
    let ysum = StateSpaceSystem::gain(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]));
    let mut blocks = vec![
        act.clone(),
        g.clone(),
        weights.we.clone(),
        weights.wd.clone(),
        weights.wu.clone(),
        weights.wn.clone(),
        esum,
        ysum,
    ];
    if let Some(h) = h {
        blocks.push(h.clone());
    }
    let mut sys = blocks[0].clone();
    for b in &blocks[1..] {
        sys = append(&sys, b)?;
    }

    // Block inputs: act 0, g 1, we 2, wd 3, wu 4, wn 5, esum 6-7, ysum 8-9, h 10.
    // Block outputs: a 0, y 1, y' 2, z1 3, d~ 4, z2 5, z3 6, e 7, ym 8, y'f 9.
    let (m_all, p_all) = (sys.n_inputs(), sys.n_outputs());
    let (r, d, n, u) = (0, 1, 2, 3);
    let mut e = DMatrix::zeros(m_all, 4);
    let mut f = DMatrix::zeros(m_all, p_all);
    e[(0, u)] = 1.0;
    f[(0, 4)] = 1.0;
    f[(1, 0)] = 1.0;
    f[(2, 7)] = 1.0;
    e[(3, d)] = 1.0;
    e[(4, u)] = 1.0;
    f[(5, 1)] = 1.0;
    e[(6, r)] = 1.0;
    f[(7, 1)] = 1.0;
    if h.is_some() {
        f[(8, 9)] = 1.0;
        f[(10, 2)] = 1.0;
    } else {
        f[(8, 2)] = 1.0;
    }
    e[(9, n)] = 1.0;
    let mut s = DMatrix::zeros(5, p_all);
    for (row, col) in [(0, 3), (1, 5), (2, 6), (3, 7), (4, 8)] {
        s[(row, col)] = 1.0;
    }
    let p = close_connections(&sys, &e, &f, &s)?;
    Ok(GeneralizedPlant { p, n_exo_in: 3, n_exo_out: 3, n_meas: 2, n_ctrl: 1 })
}

impl GeneralizedPlant {
    /// Closed loop `w → z` under a controller with inputs `(r−y, ẏ)`.
    pub fn close(&self, k: &StateSpaceSystem) -> Result<StateSpaceSystem> {
        lft_lower(&self.p, k, self.n_meas, self.n_ctrl)
    }

    /// One weighted channel of a closed loop returned by [`close`](Self::close).
    pub fn channel(closed: &StateSpaceSystem, ch: Channel) -> Result<StateSpaceSystem> {
        let (w, z) = ch.ports();
        closed.select(&[z], &[w])
    }

    pub fn order(&self) -> usize {
        self.p.order()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::weights::WeightParams;

    fn table_one() -> WeightSet {
        WeightSet::new(WeightParams {
            ms: 2.0,
            wb: 2.0 * std::f64::consts::PI * 1.8,
            eps_e: 1e-4,
            md: 400.0,
            wu_template: 800.0,
            wn: 0.1,
            wd_follows_we: false,
        })
        .unwrap()
    }

    #[test]
    fn attitude_plant_has_order_four() {
        let act = StateSpaceSystem::first_order_lag(1.0 / 53.94).unwrap();
        let gp = build_generalized_plant(&rigid_axis(), None, &act, &table_one()).unwrap();
        assert_eq!(gp.order(), 4);
        assert_eq!((gp.p.n_inputs(), gp.p.n_outputs()), (4, 5));
    }

    #[test]
    fn zero_controller_leaves_we_on_reference() {
        let act = StateSpaceSystem::first_order_lag(1.0 / 53.94).unwrap();
        let w = table_one();
        let gp = build_generalized_plant(&rigid_axis(), None, &act, &w).unwrap();
        let k0 = StateSpaceSystem::gain(DMatrix::zeros(1, 2));
        let cl = gp.close(&k0).unwrap();
        let rz = GeneralizedPlant::channel(&cl, Channel::RefToError).unwrap();
        for om in [0.01, 1.0, 100.0] {
            let a = rz.freq_response(om).unwrap()[(0, 0)];
            let b = w.we.freq_response(om).unwrap()[(0, 0)];
            assert!((a - b).norm() < 1e-9 * b.norm());
        }
    }
}
