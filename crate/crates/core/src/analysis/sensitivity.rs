use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linsys::{append, close_connections, parallel, series, FrequencyGrid, StateSpaceSystem};

/// Closed-loop inputs, in order.
pub const IN_R: usize = 0;
pub const IN_DI: usize = 1;
pub const IN_DO: usize = 2;
pub const IN_N: usize = 3;
/// Closed-loop outputs, in order.
pub const OUT_E: usize = 0;
pub const OUT_U: usize = 1;
pub const OUT_Y: usize = 2;

/// Residual of the inner inversion seen by an output disturbance, `1 − A·H`.
pub fn inversion_residual(act: &StateSpaceSystem, h: Option<&StateSpaceSystem>) -> Result<StateSpaceSystem> {
    let ah = match h {
        Some(h) => series(h, act)?,
        None => act.clone(),
    };
    parallel(&StateSpaceSystem::scalar_gain(1.0), &ah.negate())
}

/// One loop of the cascade with the inversion in place.
///
/// Inputs `[r, d_i, d_o, n]`, outputs `[r − y, u, y]`. The input disturbance
/// adds to the virtual control; the output disturbance adds to the achieved
/// acceleration after the inversion residual `1 − A·H`; `n` corrupts the
/// rate measurement.
pub fn closed_loop(
    g: &StateSpaceSystem,
    k: &StateSpaceSystem,
    act: &StateSpaceSystem,
    h: Option<&StateSpaceSystem>,
) -> Result<StateSpaceSystem> {
    if g.n_inputs() != 1 || g.n_outputs() != 2 {
        return Err(Error::Dimension("plant must have one input and outputs [y, y']".into()));
    }
    if k.n_inputs() != 2 || k.n_outputs() != 1 {
        return Err(Error::Dimension("controller must map (r - y, y') to one command".into()));
    }
    let e_res = inversion_residual(act, h)?;
    let pass = StateSpaceSystem::scalar_gain(1.0);
    // Block inputs: act 0, E 1, g 2, k 3-4, pass 5.
    // Block outputs: a 0, E 1, y 2, y' 3, u 4, r 5.
    let mut sys = append(act, &e_res)?;
    for b in [g, k, &pass] {
        sys = append(&sys, b)?;
    }
    let (m, p) = (sys.n_inputs(), sys.n_outputs());
    let mut e = DMatrix::zeros(m, 4);
    let mut f = DMatrix::zeros(m, p);
    f[(0, 4)] = 1.0;
    e[(0, IN_DI)] = 1.0;
    e[(1, IN_DO)] = 1.0;
    f[(2, 0)] = 1.0;
    f[(2, 1)] = 1.0;
    e[(3, IN_R)] = 1.0;
    f[(3, 2)] = -1.0;
    f[(4, 3)] = 1.0;
    e[(4, IN_N)] = 1.0;
    e[(5, IN_R)] = 1.0;
    let mut s = DMatrix::zeros(3, p);
    s[(OUT_E, 5)] = 1.0;
    s[(OUT_E, 2)] = -1.0;
    s[(OUT_U, 4)] = 1.0;
    s[(OUT_Y, 2)] = 1.0;
    close_connections(&sys, &e, &f, &s)
}

/// Responses of the four sensitivities at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityPoint {
    pub omega: f64,
    pub s: Complex64,
    pub ks: Complex64,
    pub s_di: Complex64,
    pub s_do: Complex64,
    pub s_n: Complex64,
}

/// The closed-loop transfers of one loop and their responses over a grid.
#[derive(Debug, Clone)]
pub struct SensitivitySet {
    /// `r → r − y`
    pub s: StateSpaceSystem,
    /// `r → u`
    pub ks: StateSpaceSystem,
    /// `d_i → y`
    pub s_di: StateSpaceSystem,
    /// `d_o → y`
    pub s_do: StateSpaceSystem,
    /// `n → y`
    pub s_n: StateSpaceSystem,
    pub points: Vec<SensitivityPoint>,
}

/// Build all closed-loop sensitivities of one loop and evaluate them on `grid`.
pub fn closed_loop_sensitivities(
    g: &StateSpaceSystem,
    k: &StateSpaceSystem,
    h: Option<&StateSpaceSystem>,
    act: &StateSpaceSystem,
    grid: &FrequencyGrid,
) -> Result<SensitivitySet> {
    let cl = closed_loop(g, k, act, h)?;
    if !cl.is_stable() {
        let unstable: Vec<String> = cl
            .poles()
            .iter()
            .filter(|p| p.re >= 0.0)
            .map(|p| format!("{:.4}{:+.4}i", p.re, p.im))
            .collect();
        return Err(Error::Synthesis(format!("closed loop is unstable, poles: {}", unstable.join(", "))));
    }
    let s = cl.select(&[OUT_E], &[IN_R])?;
    let ks = cl.select(&[OUT_U], &[IN_R])?;
    let s_di = cl.select(&[OUT_Y], &[IN_DI])?;
    let s_do = cl.select(&[OUT_Y], &[IN_DO])?;
    let s_n = cl.select(&[OUT_Y], &[IN_N])?;
    let points = grid
        .points()
        .par_iter()
        .map(|&w| {
            let m = cl.freq_response(w)?;
            Ok(SensitivityPoint {
                omega: w,
                s: m[(OUT_E, IN_R)],
                ks: m[(OUT_U, IN_R)],
                s_di: m[(OUT_Y, IN_DI)],
                s_do: m[(OUT_Y, IN_DO)],
                s_n: m[(OUT_Y, IN_N)],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivitySet { s, ks, s_di, s_do, s_n, points })
}

impl SensitivitySet {
    /// First frequency where `|S|` rises through −3 dB, interpolated on log ω.
    pub fn bandwidth(&self) -> Option<f64> {
        let lvl = std::f64::consts::FRAC_1_SQRT_2;
        self.points.windows(2).find_map(|w| {
            let (a, b) = (w[0].s.norm(), w[1].s.norm());
            if a < lvl && b >= lvl {
                let x = (lvl.ln() - a.ln()) / (b.ln() - a.ln());
                Some((w[0].omega.ln() + x * (w[1].omega.ln() - w[0].omega.ln())).exp())
            } else {
                None
            }
        })
    }

    /// `|S_di(jω)|` evaluated exactly.
    pub fn s_di_at(&self, omega: f64) -> Result<f64> {
        Ok(self.s_di.freq_response(omega)?[(0, 0)].norm())
    }

    pub fn s_do_at(&self, omega: f64) -> Result<f64> {
        Ok(self.s_do.freq_response(omega)?[(0, 0)].norm())
    }
}

/// Loop transfer broken at the plant input, `L = (K₁·G_y − K₂·G_ẏ)·A`,
/// so that the input sensitivity is `1/(1 + L)`.
pub fn loop_transfer(g: &StateSpaceSystem, k: &StateSpaceSystem, act: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    let ga = series(act, g)?;
    // Controller sees (−y, ẏ) when r = 0; L is minus the returned signal.
    let flip = StateSpaceSystem::gain(DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
    Ok(series(&series(&ga, &flip)?, k)?.negate())
}
