use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time domain of an LTI system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Continuous,
    /// Sampled with period `ts` seconds.
    Discrete { ts: f64 },
}

impl Domain {
    pub fn is_discrete(&self) -> bool {
        matches!(self, Domain::Discrete { .. })
    }

    pub fn sample_time(&self) -> Option<f64> {
        match self {
            Domain::Continuous => None,
            Domain::Discrete { ts } => Some(*ts),
        }
    }
}

/// State-space realization `x' = Ax + Bu`, `y = Cx + Du`.
///
/// Every transfer function in the crate (plants, weights, controllers,
/// filters) is carried in this form. Values are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    domain: Domain,
}

impl StateSpaceSystem {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        domain: Domain,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("A is {}x{}, must be square", n, a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::Dimension(format!("B has {} rows, A has {}", b.nrows(), n)));
        }
        if c.ncols() != n {
            return Err(Error::Dimension(format!("C has {} columns, A has {}", c.ncols(), n)));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Dimension(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        if let Domain::Discrete { ts } = domain {
            if !(ts > 0.0 && ts.is_finite()) {
                return Err(Error::InvalidParameter(format!("sample time must be positive, got {ts}")));
            }
        }
        let finite = |m: &DMatrix<f64>| m.iter().all(|v| v.is_finite());
        if !(finite(&a) && finite(&b) && finite(&c) && finite(&d)) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(Self { a, b, c, d, domain })
    }

    /// Static gain matrix (no states).
    pub fn gain(d: DMatrix<f64>) -> Self {
        let (p, m) = d.shape();
        Self {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, m),
            c: DMatrix::zeros(p, 0),
            d,
            domain: Domain::Continuous,
        }
    }

    pub fn scalar_gain(k: f64) -> Self {
        Self::gain(DMatrix::from_element(1, 1, k))
    }

    /// SISO realization of `num(s)/den(s)` in controllable canonical form.
    /// Coefficients are given highest power first; `den` must be proper
    /// with respect to `num`.
    pub fn from_tf(num: &[f64], den: &[f64]) -> Result<Self> {
        let den_trim: Vec<f64> = den.iter().copied().skip_while(|v| *v == 0.0).collect();
        let num_trim: Vec<f64> = num.iter().copied().skip_while(|v| *v == 0.0).collect();
        if den_trim.is_empty() {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        let n = den_trim.len() - 1;
        if num_trim.len() > den_trim.len() {
            return Err(Error::InvalidParameter("improper transfer function".into()));
        }
        let lead = den_trim[0];
        let den_n: Vec<f64> = den_trim.iter().map(|v| v / lead).collect();
        let mut num_n = vec![0.0; n + 1];
        let off = n + 1 - num_trim.len();
        for (i, v) in num_trim.iter().enumerate() {
            num_n[off + i] = v / lead;
        }
        let d0 = num_n[0];
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, 1);
        let mut c = DMatrix::zeros(1, n);
        if n > 0 {
            for i in 0..n - 1 {
                a[(i, i + 1)] = 1.0;
            }
            for j in 0..n {
                a[(n - 1, j)] = -den_n[n - j];
            }
            b[(n - 1, 0)] = 1.0;
            for j in 0..n {
                c[(0, j)] = num_n[n - j] - d0 * den_n[n - j];
            }
        }
        let d = DMatrix::from_element(1, 1, d0);
        Self::new(a, b, c, d, Domain::Continuous)
    }

    /// `1 / (tau s + 1)`.
    pub fn first_order_lag(tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("time constant must be positive, got {tau}")));
        }
        Self::from_tf(&[1.0], &[tau, 1.0])
    }

    /// `wn^2 / (s^2 + 2 zeta wn s + wn^2)`.
    pub fn second_order_lowpass(zeta: f64, wn: f64) -> Result<Self> {
        if !(zeta > 0.0 && wn > 0.0) {
            return Err(Error::InvalidParameter("damping and natural frequency must be positive".into()));
        }
        Self::from_tf(&[wn * wn], &[1.0, 2.0 * zeta * wn, wn * wn])
    }

    pub fn integrator() -> Self {
        Self::from_tf(&[1.0], &[1.0, 0.0]).expect("integrator realization")
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }
    pub fn domain(&self) -> Domain {
        self.domain
    }
    pub fn order(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn into_parts(self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, Domain) {
        (self.a, self.b, self.c, self.d, self.domain)
    }

    pub(crate) fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn poles(&self) -> Vec<Complex64> {
        if self.order() == 0 {
            return Vec::new();
        }
        eigenvalues(&self.a)
    }

    /// Largest pole real part (continuous) or modulus (discrete).
    pub fn stability_abscissa(&self) -> f64 {
        let poles = self.poles();
        match self.domain {
            Domain::Continuous => poles.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max),
            Domain::Discrete { .. } => poles.iter().map(|p| p.norm()).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn is_stable(&self) -> bool {
        if self.order() == 0 {
            return true;
        }
        let s = self.stability_abscissa();
        match self.domain {
            Domain::Continuous => s < 0.0,
            Domain::Discrete { .. } => s < 1.0,
        }
    }

    /// Keep the listed outputs (rows) and inputs (columns).
    pub fn select(&self, outputs: &[usize], inputs: &[usize]) -> Result<Self> {
        let p = self.n_outputs();
        let m = self.n_inputs();
        if outputs.iter().any(|&i| i >= p) || inputs.iter().any(|&j| j >= m) {
            return Err(Error::Dimension("channel index out of range".into()));
        }
        let b = self.b.select_columns(inputs);
        let c = self.c.select_rows(outputs);
        let d = self.d.select_rows(outputs).select_columns(inputs);
        Self::new(self.a.clone(), b, c, d, self.domain)
    }

    /// Multiply outputs by a scalar.
    pub fn scale_output(&self, k: f64) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: &self.c * k,
            d: &self.d * k,
            domain: self.domain,
        }
    }

    pub fn negate(&self) -> Self {
        self.scale_output(-1.0)
    }

    /// Steady-state gain `D - C A^-1 B` (continuous) or `D + C (I-A)^-1 B`.
    pub fn dc_gain(&self) -> Result<DMatrix<f64>> {
        if self.order() == 0 {
            return Ok(self.d.clone());
        }
        let n = self.order();
        let m = match self.domain {
            Domain::Continuous => -self.a.clone(),
            Domain::Discrete { .. } => DMatrix::identity(n, n) - &self.a,
        };
        let x = m
            .lu()
            .solve(&self.b)
            .ok_or_else(|| Error::PoleOnContour { omega: 0.0 })?;
        Ok(&self.d + &self.c * x)
    }
}

pub(crate) fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let ev: DVector<Complex64> = a.clone().complex_eigenvalues();
    ev.iter().map(|z| Complex64::new(z.re, z.im)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_dimensions() {
        let r = StateSpaceSystem::new(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(3, 1),
            DMatrix::zeros(1, 2),
            DMatrix::zeros(1, 1),
            Domain::Continuous,
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn rejects_nonpositive_sample_time() {
        let r = StateSpaceSystem::new(
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 1),
            Domain::Discrete { ts: 0.0 },
        );
        assert!(r.is_err());
    }

    #[test]
    fn tf_realization_dc_gain() {
        let sys = StateSpaceSystem::from_tf(&[2.0, 6.0], &[1.0, 3.0, 2.0]).unwrap();
        assert_eq!(sys.order(), 2);
        let g = sys.dc_gain().unwrap();
        assert!((g[(0, 0)] - 3.0).abs() < 1e-12);
        let mut poles: Vec<f64> = sys.poles().iter().map(|p| p.re).collect();
        poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((poles[0] + 2.0).abs() < 1e-9 && (poles[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn biproper_tf_keeps_feedthrough() {
        let sys = StateSpaceSystem::from_tf(&[0.5, 3.0], &[1.0, 0.01]).unwrap();
        assert!((sys.d()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((sys.dc_gain().unwrap()[(0, 0)] - 300.0).abs() < 1e-9);
    }
}
