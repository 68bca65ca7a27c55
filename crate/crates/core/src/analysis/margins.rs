use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use super::sensitivity::loop_transfer;
use crate::error::{Error, Result};
use crate::linsys::StateSpaceSystem;

const SCAN_LO: f64 = 1e-3;
const SCAN_HI: f64 = 1e4;
const SCAN_POINTS: usize = 20_000;

/// Robustness margins of one loop, broken at the plant input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `1/‖1/(1+L)‖∞`, the distance of the Nyquist curve from −1.
    pub modulus: f64,
    /// Gain increase to instability in dB; infinite without a −180° crossing below unit gain.
    pub gain_db: f64,
    /// Gain reduction to instability in dB (positive), infinite when none exists.
    pub gain_reduction_db: f64,
    /// Phase margin in degrees at the lowest-margin unit-gain crossing.
    pub phase_deg: f64,
    /// Frequency of the worst phase margin, rad/s.
    pub crossover: Option<f64>,
}

fn refine(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    // Bisection on ln ω; f changes sign on [a, b].
    let fa = f(a);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Margins of a loop given by its open-loop response `l_at(ω)`, scanned on
/// a dense log grid with crossings refined by bisection.
fn scan<F: Fn(f64) -> Complex64 + Sync>(l_at: F, modulus: Option<f64>) -> Margins {
    let (l0, l1) = (SCAN_LO.ln(), SCAN_HI.ln());
    let xs: Vec<f64> = (0..SCAN_POINTS).map(|i| l0 + (l1 - l0) * i as f64 / (SCAN_POINTS - 1) as f64).collect();
    let at = |x: f64| l_at(x.exp());
    let resp: Vec<Complex64> = xs.par_iter().map(|&x| at(x)).collect();
    let modulus = modulus.unwrap_or_else(|| {
        let peak = resp.iter().chain([at(l1)].iter()).map(|v| 1.0 / (1.0 + v).norm()).filter(|v| v.is_finite()).fold(0.0, f64::max);
        1.0 / peak
    });

    let mut gain_db = f64::INFINITY;
    let mut gain_reduction_db = f64::INFINITY;
    let mut phase_deg = f64::INFINITY;
    let mut crossover = None;
    for i in 0..SCAN_POINTS - 1 {
        let (a, b) = (resp[i], resp[i + 1]);
        if !(a.is_finite() && b.is_finite()) {
            continue;
        }
        if (a.im > 0.0) != (b.im > 0.0) && (a.re < 0.0 || b.re < 0.0) {
            let x = refine(&|x| at(x).im, xs[i], xs[i + 1]);
            let v = at(x);
            if v.re < 0.0 {
                let db = -20.0 * v.norm().log10();
                if db >= 0.0 {
                    gain_db = gain_db.min(db);
                } else {
                    gain_reduction_db = gain_reduction_db.min(-db);
                }
            }
        }
        if (a.norm() > 1.0) != (b.norm() > 1.0) {
            let x = refine(&|x| at(x).norm() - 1.0, xs[i], xs[i + 1]);
            let v = at(x);
            let pm = 180.0 + v.arg().to_degrees();
            let pm = if pm > 180.0 { pm - 360.0 } else { pm };
            if pm.abs() < phase_deg.abs() {
                phase_deg = pm;
                crossover = Some(x.exp());
            }
        }
    }
    Margins { modulus, gain_db, gain_reduction_db, phase_deg, crossover }
}

/// Margins of the loop whose sensitivity is `S`.
///
/// The modulus margin is `1/‖S‖∞`; gain and phase margins come from the
/// equivalent open loop `L = (1 − S)/S`, so that `S = 1/(1 + L)` exactly.
pub fn margins(s: &StateSpaceSystem) -> Result<Margins> {
    if s.n_inputs() != 1 || s.n_outputs() != 1 {
        return Err(Error::Dimension("margins need a SISO sensitivity".into()));
    }
    let peak = s.hinf_norm(1e-9)?;
    let l_at = |w: f64| match s.freq_response(w) {
        Ok(m) => (1.0 - m[(0, 0)]) / m[(0, 0)],
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    };
    Ok(scan(l_at, Some(1.0 / peak)))
}

/// Margins with the loop broken at the plant input, `L = (K₁G_y − K₂G_ẏ)·A`.
pub fn input_margins(g: &StateSpaceSystem, k: &StateSpaceSystem, act: &StateSpaceSystem) -> Result<Margins> {
    let l = loop_transfer(g, k, act)?;
    let l_at = |w: f64| match l.freq_response(w) {
        Ok(m) => m[(0, 0)],
        Err(_) => Complex64::new(f64::INFINITY, 0.0),
    };
    Ok(scan(l_at, None))
}

impl Margins {
    /// The usual robustness floor: modulus 0.5, 6 dB, 30°.
    pub fn meets_floor(&self) -> bool {
        self.modulus >= 0.5 && self.gain_db >= 6.0 && self.phase_deg >= 30.0
    }
}
