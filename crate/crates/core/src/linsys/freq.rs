use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::system::{Domain, StateSpaceSystem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

/// Strictly increasing set of positive angular frequencies (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    spacing: Spacing,
}

impl FrequencyGrid {
    pub fn log(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && n >= 2) {
            return Err(Error::InvalidParameter(format!("bad log grid [{lo}, {hi}] x {n}")));
        }
        let (l0, l1) = (lo.log10(), hi.log10());
        let points = (0..n)
            .map(|i| 10f64.powf(l0 + (l1 - l0) * i as f64 / (n - 1) as f64))
            .collect();
        Ok(Self { points, spacing: Spacing::Log })
    }

    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && n >= 2) {
            return Err(Error::InvalidParameter(format!("bad linear grid [{lo}, {hi}] x {n}")));
        }
        let points = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        Ok(Self { points, spacing: Spacing::Linear })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points[0] <= 0.0 || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("grid must be positive and strictly increasing".into()));
        }
        Ok(Self { points, spacing: Spacing::Log })
    }

    /// 600 log-spaced points over [1e-2, 1e3] rad/s.
    pub fn analysis_default() -> Self {
        Self::log(1e-2, 1e3, 600).expect("static grid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
    pub fn spacing(&self) -> Spacing {
        self.spacing
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Complex evaluation point for angular frequency `omega`.
pub(crate) fn contour_point(domain: Domain, omega: f64) -> Complex64 {
    match domain {
        Domain::Continuous => Complex64::new(0.0, omega),
        Domain::Discrete { ts } => Complex64::from_polar(1.0, omega * ts),
    }
}

impl StateSpaceSystem {
    /// Transfer matrix at an arbitrary complex point `s` (or `z`).
    pub fn eval_at(&self, s: Complex64) -> Option<DMatrix<Complex64>> {
        let d = self.d().map(|v| Complex64::new(v, 0.0));
        let n = self.order();
        if n == 0 {
            return Some(d);
        }
        let mut m = self.a().map(|v| Complex64::new(-v, 0.0));
        for i in 0..n {
            m[(i, i)] += s;
        }
        let b = self.b().map(|v| Complex64::new(v, 0.0));
        let lu = m.lu();
        // Reject numerically singular resolvents.
        let u = lu.u();
        let scale = self.a().amax().max(s.norm()).max(1.0);
        let min_pivot = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if !(min_pivot > scale * 1e-13) {
            return None;
        }
        let x = lu.solve(&b)?;
        let c = self.c().map(|v| Complex64::new(v, 0.0));
        Some(c * x + d)
    }

    /// `C (jwI - A)^-1 B + D`, or the `e^{jwTs}` variant for discrete systems.
    pub fn freq_response(&self, omega: f64) -> Result<DMatrix<Complex64>> {
        if !(omega >= 0.0) {
            return Err(Error::InvalidParameter(format!("frequency must be >= 0, got {omega}")));
        }
        self.eval_at(contour_point(self.domain(), omega))
            .ok_or(Error::PoleOnContour { omega })
    }

    /// Responses over a grid, in grid order.
    pub fn freq_response_grid(&self, grid: &FrequencyGrid) -> Result<Vec<DMatrix<Complex64>>> {
        grid.points().iter().map(|&w| self.freq_response(w)).collect()
    }

    /// SISO magnitude (first input to first output) over a grid.
    pub fn magnitude(&self, grid: &FrequencyGrid) -> Result<Vec<f64>> {
        grid.points()
            .iter()
            .map(|&w| self.freq_response(w).map(|g| g[(0, 0)].norm()))
            .collect()
    }
}

/// Largest singular value of a complex matrix.
pub fn sigma_max(g: &DMatrix<Complex64>) -> f64 {
    match g.shape() {
        (0, _) | (_, 0) => 0.0,
        (1, 1) => g[(0, 0)].norm(),
        (1, _) | (_, 1) => g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        _ => g
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(0.0, |acc: f64, v| acc.max(*v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn integrator_at_unit_frequency_is_minus_j() {
        let g = StateSpaceSystem::integrator().freq_response(1.0).unwrap();
        assert!((g[(0, 0)] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn integrator_at_dc_is_pole_on_contour() {
        let r = StateSpaceSystem::integrator().freq_response(0.0);
        assert!(matches!(r, Err(Error::PoleOnContour { .. })));
    }

    #[test]
    fn actuator_lag_unit_dc_gain() {
        let a = StateSpaceSystem::first_order_lag(1.0 / 53.94).unwrap();
        let g = a.freq_response(0.0).unwrap();
        assert!((g[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn second_order_filter_at_natural_frequency() {
        let (zeta, wn) = (0.55, 50.0);
        let h = StateSpaceSystem::second_order_lowpass(zeta, wn).unwrap();
        let g = h.freq_response(wn).unwrap()[(0, 0)].norm();
        assert!((g - 1.0 / (2.0 * zeta)).abs() < 1e-12);
        assert!((g - 0.9091).abs() < 1e-4);
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::log(0.0, 1.0, 10).is_err());
        assert!(FrequencyGrid::from_points(vec![1.0, 1.0]).is_err());
        let g = FrequencyGrid::analysis_default();
        assert_eq!(g.len(), 600);
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sigma_max_matches_svd_for_square() {
        let g = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(3.0, 0.0), Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0), Complex64::new(0.0, 4.0),
        ]);
        assert!((sigma_max(&g) - 4.0).abs() < 1e-12);
    }
}
