use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::log::FlightLog;
use crate::error::{Error, Result};
use crate::indi_control::InnerIndi;
use crate::vehicle::{QuadcopterParams, GRAVITY};

/// Settings for a synthetic identification log with known `{τ_m, G₁₂}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticLogConfig {
    pub duration: f64,
    pub fs: f64,
    pub tau_m: f64,
    pub g12: [[f64; 4]; 4],
    /// Operating point of every motor, in throttle units (speed scale 1).
    pub hover: f64,
    /// Half-range of the random throttle steps around `hover`.
    pub amplitude: f64,
    /// Range of the random step hold times, s.
    pub hold: [f64; 2],
    /// White noise on the measured accelerations, as a fraction of each
    /// channel's excitation RMS. Rates integrate the noisy angular acceleration.
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticLogConfig {
    /// 20 s at the vehicle rate, true values from the vehicle model.
    pub fn for_vehicle(p: &QuadcopterParams, seed: u64) -> Result<Self> {
        let g = *InnerIndi::from_params(p, 1.0)?.g12();
        Ok(Self {
            duration: 20.0,
            fs: p.fs(),
            tau_m: p.tau_m,
            g12: std::array::from_fn(|i| std::array::from_fn(|j| g[(i, j)])),
            hover: p.hover_speed(),
            amplitude: 0.1 * p.hover_speed(),
            hold: [0.02, 0.2],
            noise: 0.0,
            seed,
        })
    }
}

/// Forward-simulate the linear increment model under random throttle steps.
pub fn generate_log(cfg: &SyntheticLogConfig) -> Result<FlightLog> {
    if !(cfg.duration > 0.0 && cfg.fs > 0.0 && cfg.tau_m > 0.0 && cfg.hold[0] > 0.0 && cfg.hold[1] >= cfg.hold[0] && cfg.noise >= 0.0) {
        return Err(Error::InvalidParameter("bad synthetic log settings".into()));
    }
    let n = (cfg.duration * cfg.fs).round() as usize + 1;
    let ts = 1.0 / cfg.fs;
    let g = Matrix4::from_fn(|i, j| cfg.g12[i][j]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut throttle = Vec::with_capacity(n);
    let mut level = [cfg.hover; 4];
    let mut next_switch = [0usize; 4];
    for k in 0..n {
        for m in 0..4 {
            if k >= next_switch[m] {
                level[m] = cfg.hover + rng.random_range(-cfg.amplitude..=cfg.amplitude);
                let hold = rng.random_range(cfg.hold[0]..=cfg.hold[1]);
                next_switch[m] = k + ((hold * cfg.fs).round() as usize).max(1);
            }
        }
        throttle.push(level);
    }
    // Same discretization as the estimator, with the true time constant.
    let speed = super::estimate::estimate_motor_speed(&throttle, cfg.tau_m, 1.0, cfg.fs)?;

    let clean: Vec<Vector4<f64>> =
        speed.iter().map(|w| g * (Vector4::from(*w) - Vector4::repeat(cfg.hover))).collect();
    let rms: Vec<f64> = (0..4)
        .map(|j| (clean.iter().map(|v| v[j] * v[j]).sum::<f64>() / n as f64).sqrt())
        .collect();
    let std_normal = Normal::new(0.0, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let mut gyro = Vec::with_capacity(n);
    let mut acc_z = Vec::with_capacity(n);
    let mut rate = [0.0; 3];
    for (k, c) in clean.iter().enumerate() {
        let mut v = *c;
        if cfg.noise > 0.0 {
            for j in 0..4 {
                v[j] += cfg.noise * rms[j] * std_normal.sample(&mut rng);
            }
        }
        if k > 0 {
            for j in 0..3 {
                rate[j] += ts * v[j];
            }
        }
        gyro.push(rate);
        acc_z.push(-GRAVITY + v[3]);
    }
    FlightLog::new(cfg.fs, gyro, acc_z, throttle, Some(speed))
}
