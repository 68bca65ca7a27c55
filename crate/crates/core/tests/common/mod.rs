#![allow(dead_code)]

use std::sync::OnceLock;

use indi_hinf::linsys::{FrequencyGrid, StateSpaceSystem};
use indi_hinf::sim::ControllerChoice;
use indi_hinf::synthesis::{rigid_axis, ControllerKind, DesignProfile, LoopKind, SynthesisReport};
use indi_hinf::vehicle::{measurement_filter, QuadcopterParams};
use indi_hinf::analysis::{closed_loop_sensitivities, SensitivitySet};

pub const KINDS: [ControllerKind; 3] = [ControllerKind::Pd, ControllerKind::HinfStructured, ControllerKind::HinfFull];

pub struct Designs {
    pub params: QuadcopterParams,
    pub profile: DesignProfile,
    /// Indexed like [`KINDS`].
    pub attitude: Vec<SynthesisReport>,
    pub guidance: Vec<SynthesisReport>,
}

impl Designs {
    pub fn reports(&self, l: LoopKind) -> &[SynthesisReport] {
        match l {
            LoopKind::Attitude => &self.attitude,
            LoopKind::Guidance => &self.guidance,
        }
    }

    pub fn choice(&self, i: usize) -> ControllerChoice {
        ControllerChoice {
            label: KINDS[i].label().into(),
            attitude: self.attitude[i].controller.clone(),
            guidance: self.guidance[i].controller.clone(),
        }
    }

    pub fn choices(&self) -> Vec<ControllerChoice> {
        (0..KINDS.len()).map(|i| self.choice(i)).collect()
    }

    pub fn actuator(&self, l: LoopKind) -> StateSpaceSystem {
        StateSpaceSystem::first_order_lag(self.profile.plant_tau(l, &self.params)).unwrap()
    }

    pub fn sensitivities(&self, l: LoopKind, i: usize) -> SensitivitySet {
        let h = measurement_filter(&self.params.filter).unwrap();
        let k = &self.reports(l)[i].controller.k;
        closed_loop_sensitivities(&rigid_axis(), k, Some(&h), &self.actuator(l), &FrequencyGrid::analysis_default()).unwrap()
    }
}

pub fn design_all(preset: &str, seed: u64) -> Designs {
    let params = QuadcopterParams::preset(preset).unwrap();
    let profile = DesignProfile::for_vehicle(preset).unwrap();
    let run = |l| KINDS.iter().map(|&k| profile.design(l, k, &params, None, seed).unwrap()).collect();
    let attitude = run(LoopKind::Attitude);
    let guidance = run(LoopKind::Guidance);
    Designs { params, profile, attitude, guidance }
}

/// Designs for the simulation vehicle at seed 0, built once per test binary.
pub fn sim_designs() -> &'static Designs {
    static CELL: OnceLock<Designs> = OnceLock::new();
    CELL.get_or_init(|| design_all("bebop-sim", 0))
}

/// Perfect-model sweep of the inner loop: roll acceleration command
/// `ν = a·cos(ωt)` in, true roll acceleration out. Returns the complex gain.
pub fn inner_loop_response(params: &QuadcopterParams, omega: f64) -> num_complex::Complex64 {
    use indi_hinf::indi_control::{AngularAccel, InnerIndi};
    use indi_hinf::vehicle::{dynamics_derivative, step, DisturbanceSample, MeasurementFilter, QuadState};
    use nalgebra::{Vector3, Vector4};

    let fs = params.fs();
    let mut inner = InnerIndi::from_params(params, 1.0).unwrap();
    let mut filter = MeasurementFilter::new(&params.filter, fs, 7).unwrap();
    let mut diff = AngularAccel::new(params.ts);
    let none = DisturbanceSample::default();
    // Keeps the roll excursion near 0.05 rad at every frequency.
    let amp = 0.05 * omega * omega;
    let period = 2.0 * std::f64::consts::PI / omega;
    let t_fit = 3.0;
    let n_fit = ((period * (4.0f64).max((4.0 / period).ceil())) * fs).round() as usize;
    let n = (t_fit * fs) as usize + n_fit;

    let mut s = QuadState::hover([0.0; 3], params.hover_speed());
    let (mut sc, mut ss, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let t = k as f64 / fs;
        let mut raw = [0.0; 7];
        raw[0..3].copy_from_slice(&s.rates);
        raw[3..7].copy_from_slice(&s.motors);
        let f = filter.step(&raw);
        let rates_dot_f = diff.step(Vector3::new(f[0], f[1], f[2]));
        let nu = Vector3::new(amp * (omega * t).cos(), 0.0, 0.0);
        let cmd = inner.step(nu, 0.0, Vector4::new(f[3], f[4], f[5], f[6]), rates_dot_f);
        let cmd = [cmd[0], cmd[1], cmd[2], cmd[3]];
        if k >= n - n_fit {
            let wd: [f64; 4] = std::array::from_fn(|i| {
                (cmd[i].clamp(0.0, params.omega_max) - s.motors[i]) / params.tau_m
            });
            let y = dynamics_derivative(&s, params, &none, &wd).unwrap().rates[0];
            let (c, sn) = ((omega * t).cos(), (omega * t).sin());
            sc += c * nu[0];
            ss += sn * nu[0];
            yc += c * y;
            ys += sn * y;
        }
        s = step(&s, params, &cmd, &none).unwrap();
    }
    // Fourier coefficients over whole periods; cos ↦ Re, sin ↦ −Im.
    let input = num_complex::Complex64::new(sc, -ss);
    let output = num_complex::Complex64::new(yc, -ys);
    output / input
}
