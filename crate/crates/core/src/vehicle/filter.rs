use super::params::FilterParams;
use crate::error::Result;
use crate::linsys::{DiscreteRunner, StateSpaceSystem};

/// Continuous-time `H(s)` for the given filter parameters.
pub fn measurement_filter(f: &FilterParams) -> Result<StateSpaceSystem> {
    StateSpaceSystem::second_order_lowpass(f.zeta, f.wn)
}

/// Bank of identical Tustin-discretized `H(s)` filters, one per channel.
#[derive(Debug, Clone)]
pub struct MeasurementFilter {
    channels: Vec<DiscreteRunner>,
    started: bool,
}

impl MeasurementFilter {
    pub fn new(f: &FilterParams, fs: f64, n_channels: usize) -> Result<Self> {
        let h = measurement_filter(f)?.discretize_tustin(fs)?;
        let runner = DiscreteRunner::new(&h)?;
        Ok(Self { channels: vec![runner; n_channels], started: false })
    }

    /// Filter one sample per channel. The first call initializes every
    /// channel at the steady state of its first raw sample.
    pub fn step(&mut self, raw: &[f64]) -> Vec<f64> {
        assert_eq!(raw.len(), self.channels.len(), "channel count mismatch");
        if !self.started {
            for (c, &u) in self.channels.iter_mut().zip(raw) {
                c.reset_steady(&[u]);
            }
            self.started = true;
        }
        self.channels.iter_mut().zip(raw).map(|(c, &u)| c.step_scalar(u)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filt() -> MeasurementFilter {
        MeasurementFilter::new(&FilterParams { zeta: 0.55, wn: 50.0 }, 500.0, 1).unwrap()
    }

    fn amplitude_ratio(w: f64) -> f64 {
        let mut f = filt();
        let fs = 500.0;
        let n = (2.0 * fs) as usize + (40.0 * fs / w).ceil() as usize;
        let mut peak: f64 = 0.0;
        for k in 0..n {
            let t = k as f64 / fs;
            let y = f.step(&[(w * t).sin()])[0];
            if t > 2.0 {
                peak = peak.max(y.abs());
            }
        }
        peak
    }

    #[test]
    fn constant_passes_unchanged() {
        let mut f = filt();
        for _ in 0..20 {
            assert!((f.step(&[2.5])[0] - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn resonance_ratio() {
        let r = amplitude_ratio(50.0);
        assert!((r - 1.0 / 1.1).abs() / (1.0 / 1.1) < 0.02, "{r}");
    }

    #[test]
    fn high_frequency_rolloff() {
        let r = amplitude_ratio(500.0);
        assert!(r > 0.01 / 1.5 && r < 0.01 * 1.5, "{r}");
    }
}
