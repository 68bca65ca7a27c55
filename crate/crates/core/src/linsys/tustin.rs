use nalgebra::DMatrix;

use super::system::{Domain, StateSpaceSystem};
use crate::error::{Error, Result};

/// Bilinear (Tustin) discretization at sample rate `fs` Hz, no prewarping.
///
/// Uses `Ad = M⁻¹(I + A·Ts/2)`, `Bd = M⁻¹B·Ts`, `Cd = C·M⁻¹`,
/// `Dd = D + C·M⁻¹B·Ts/2` with `M = I − A·Ts/2`.
pub fn discretize_tustin(sys: &StateSpaceSystem, fs: f64) -> Result<StateSpaceSystem> {
    if sys.domain().is_discrete() {
        return Err(Error::InvalidParameter("system is already discrete".into()));
    }
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(Error::InvalidParameter(format!("sample rate must be positive, got {fs}")));
    }
    let ts = 1.0 / fs;
    let n = sys.order();
    if n == 0 {
        return Ok(sys.clone().with_domain(Domain::Discrete { ts }));
    }
    let i = DMatrix::<f64>::identity(n, n);
    let m = &i - sys.a() * (ts / 2.0);
    let singular = sys.poles().iter().any(|p| (p - 2.0 / ts).norm() <= 1e-9 * (2.0 / ts));
    let m_inv = match (singular, m.try_inverse()) {
        (false, Some(inv)) => inv,
        _ => return Err(Error::TustinSingular(2.0 / ts)),
    };
    let ad = &m_inv * (&i + sys.a() * (ts / 2.0));
    let bd = &m_inv * sys.b() * ts;
    let cd = sys.c() * &m_inv;
    let dd = sys.d() + sys.c() * &m_inv * sys.b() * (ts / 2.0);
    StateSpaceSystem::new(ad, bd, cd, dd, Domain::Discrete { ts })
}

impl StateSpaceSystem {
    pub fn discretize_tustin(&self, fs: f64) -> Result<StateSpaceSystem> {
        discretize_tustin(self, fs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn integrator_maps_to_trapezoid() {
        let d = discretize_tustin(&StateSpaceSystem::integrator(), 500.0).unwrap();
        let ts = 0.002;
        assert_eq!(d.domain(), Domain::Discrete { ts });
        for w in [0.5, 3.0, 100.0] {
            let z = Complex64::from_polar(1.0, w * ts);
            let want = (z + 1.0) / (z - 1.0) * (ts / 2.0);
            let got = d.freq_response(w).unwrap()[(0, 0)];
            assert!((got - want).norm() < 1e-10 * want.norm());
        }
    }

    #[test]
    fn lag_response_preserved_at_low_frequency() {
        let c = StateSpaceSystem::first_order_lag(1.0).unwrap();
        let d = c.discretize_tustin(500.0).unwrap();
        let gc = c.freq_response(1.0).unwrap()[(0, 0)];
        let gd = d.freq_response(1.0).unwrap()[(0, 0)];
        assert!((gc - gd).norm() / gc.norm() < 1e-3);
    }

    #[test]
    fn pole_at_two_over_ts_rejected() {
        let sys = StateSpaceSystem::from_tf(&[1.0], &[1.0, -1000.0]).unwrap();
        assert!(matches!(sys.discretize_tustin(500.0), Err(Error::TustinSingular(_))));
    }
}
