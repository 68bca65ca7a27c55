use num_complex::Complex64;

use super::freq::{contour_point, sigma_max};
use super::system::{Domain, StateSpaceSystem};
use crate::error::{Error, Result};

const POINTS_PER_DECADE: f64 = 400.0;
const REFINE_PEAKS: usize = 8;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

impl StateSpaceSystem {
    /// Peak gain over frequency. See [`hinf_norm`].
    pub fn hinf_norm(&self, tol: f64) -> Result<f64> {
        hinf_norm(self, tol)
    }
}

/// Frequency band that brackets all dynamics of `sys`, in rad/s.
fn scan_band(sys: &StateSpaceSystem) -> (f64, f64) {
    let mags: Vec<f64> = sys
        .poles()
        .iter()
        .map(|p| match sys.domain() {
            Domain::Continuous => p.norm(),
            // Equivalent continuous-time magnitude of a z-plane pole.
            Domain::Discrete { ts } => {
                let l = p.ln();
                if l.is_finite() { l.norm() / ts } else { 1.0 / ts }
            }
        })
        .filter(|m| *m > 0.0 && m.is_finite())
        .collect();
    let (mut lo, mut hi) = if mags.is_empty() {
        (1e-2, 1e2)
    } else {
        let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mags.iter().copied().fold(0.0, f64::max);
        (lo / 100.0, hi * 100.0)
    };
    lo = lo.max(1e-12);
    if let Domain::Discrete { ts } = sys.domain() {
        hi = hi.min(std::f64::consts::PI / ts);
        lo = lo.min(hi / 10.0);
    }
    (lo, hi)
}

/// H∞ norm of a stable system.
///
/// A log-spaced scan (at least 400 points per decade over the band spanned
/// by the poles, plus DC and the band edge) brackets the peak; the largest
/// local maxima are then refined by golden-section search on log ω until the
/// bracket is below `tol` relative width.
pub fn hinf_norm(sys: &StateSpaceSystem, tol: f64) -> Result<f64> {
    if sys.n_inputs() == 0 || sys.n_outputs() == 0 {
        return Ok(0.0);
    }
    if sys.order() == 0 {
        return Ok(sigma_max(&sys.d().map(|v| Complex64::new(v, 0.0))));
    }
    if !sys.is_stable() {
        return Err(Error::Unstable { max_real: sys.stability_abscissa() });
    }
    let tol = tol.clamp(1e-12, 1e-1);
    let domain = sys.domain();
    let gain = |w: f64| -> f64 {
        sys.eval_at(contour_point(domain, w))
            .map(|g| sigma_max(&g))
            .unwrap_or(f64::INFINITY)
    };

    let (lo, hi) = scan_band(sys);
    let decades = (hi / lo).log10().max(1.0);
    let n = (decades * POINTS_PER_DECADE).ceil() as usize + 1;
    let (l0, l1) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..n).map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()).collect();
    let vals: Vec<f64> = grid.iter().map(|&w| gain(w)).collect();

    let mut best = gain(0.0).max(match domain {
        Domain::Continuous => sigma_max(&sys.d().map(|v| Complex64::new(v, 0.0))),
        Domain::Discrete { ts } => gain(std::f64::consts::PI / ts),
    });
    best = vals.iter().copied().fold(best, f64::max);
    if !best.is_finite() {
        return Ok(best);
    }

    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { vals[i - 1] };
            let right = if i + 1 == n { f64::NEG_INFINITY } else { vals[i + 1] };
            vals[i] >= left && vals[i] >= right
        })
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    peaks.truncate(REFINE_PEAKS);

    for i in peaks {
        let mut a = if i == 0 { l0 } else { grid[i - 1].ln() };
        let mut b = if i + 1 == n { l1 } else { grid[i + 1].ln() };
        let f = |x: f64| gain(x.exp());
        let mut x1 = b - GOLDEN * (b - a);
        let mut x2 = a + GOLDEN * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..200 {
            if b - a < tol * 1e-2 {
                break;
            }
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - GOLDEN * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + GOLDEN * (b - a);
                f2 = f(x2);
            }
        }
        best = best.max(f1).max(f2);
    }
    Ok(best)
}
