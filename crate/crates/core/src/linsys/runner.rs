use nalgebra::{DMatrix, DVector};

use super::system::StateSpaceSystem;
use crate::error::{Error, Result};

/// Stateful evaluation of a discrete system one sample at a time.
#[derive(Debug, Clone)]
pub struct DiscreteRunner {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    x: DVector<f64>,
}

impl DiscreteRunner {
    pub fn new(sys: &StateSpaceSystem) -> Result<Self> {
        if !sys.domain().is_discrete() && sys.order() > 0 {
            return Err(Error::InvalidParameter("runner needs a discrete system".into()));
        }
        Ok(Self {
            a: sys.a().clone(),
            b: sys.b().clone(),
            c: sys.c().clone(),
            d: sys.d().clone(),
            x: DVector::zeros(sys.order()),
        })
    }

    /// Put the state at the equilibrium for a constant input `u`.
    /// Falls back to the zero state if the system has a pole at z = 1.
    pub fn reset_steady(&mut self, u: &[f64]) {
        let n = self.a.nrows();
        let u = DVector::from_column_slice(u);
        let m = DMatrix::identity(n, n) - &self.a;
        self.x = m.lu().solve(&(&self.b * u)).unwrap_or_else(|| DVector::zeros(n));
    }

    pub fn reset(&mut self) {
        self.x.fill(0.0);
    }

    /// Output for input `u`, then advance the state.
    pub fn step(&mut self, u: &[f64]) -> DVector<f64> {
        let u = DVector::from_column_slice(u);
        let y = &self.c * &self.x + &self.d * &u;
        self.x = &self.a * &self.x + &self.b * &u;
        y
    }

    /// Single-input single-output convenience wrapper.
    pub fn step_scalar(&mut self, u: f64) -> f64 {
        self.step(&[u])[0]
    }

    pub fn state(&self) -> &DVector<f64> {
        &self.x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steady_reset_holds_output() {
        let h = StateSpaceSystem::second_order_lowpass(0.55, 50.0).unwrap().discretize_tustin(500.0).unwrap();
        let mut r = DiscreteRunner::new(&h).unwrap();
        r.reset_steady(&[3.0]);
        for _ in 0..10 {
            assert!((r.step_scalar(3.0) - 3.0).abs() < 1e-12);
        }
    }
}
