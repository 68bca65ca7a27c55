use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::scenario::Scenario;
use super::trace::{RunStatus, SimTrace, TraceRow};
use crate::error::Result;
use crate::indi_control::{ControllerStack, Measurements, References};
use crate::synthesis::LoopController;
use crate::vehicle::{linear_acceleration, step, QuadState, QuadcopterParams};

/// Position bound, m.
pub const MAX_POSITION: f64 = 100.0;
/// Body-rate bound, rad/s.
pub const MAX_RATE: f64 = 200.0;

/// Linear controllers used for one run.
#[derive(Debug, Clone)]
pub struct ControllerChoice {
    pub label: String,
    pub attitude: LoopController,
    pub guidance: LoopController,
}

/// Simulate `scenario` on `params` with the given controllers.
///
/// Setup errors are returned; errors during the run end the trace early
/// with a `Failed` or `Diverged` status.
pub fn run_scenario(scenario: &Scenario, params: &QuadcopterParams, ctrl: &ControllerChoice) -> Result<SimTrace> {
    scenario.validate()?;
    params.validate()?;
    let fs = params.fs();
    let dist = scenario.disturbance_schedule()?;
    let mut stack = ControllerStack::new(params, &ctrl.attitude, &ctrl.guidance, scenario.mode, scenario.model_scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    let mut state = QuadState::hover(scenario.initial_pos, params.hover_speed());
    let n = scenario.n_samples(fs);
    let mut rows = Vec::with_capacity(n);
    let mut status = RunStatus::Completed;
    for k in 0..n {
        let t = k as f64 / fs;
        let d = dist.at(t);
        let (ref_pos, ref_euler) = scenario.reference_at(t);
        let mut meas_state = state;
        let mut acc = linear_acceleration(&state, params, &d);
        if scenario.noise.gyro > 0.0 {
            for r in meas_state.rates.iter_mut() {
                *r += scenario.noise.gyro * unit.sample(&mut rng);
            }
        }
        if scenario.noise.accel > 0.0 {
            acc += Vector3::from_fn(|_, _| scenario.noise.accel * unit.sample(&mut rng));
        }
        let refs = References { pos: ref_pos, euler: ref_euler };
        let out = match stack.step(&refs, &Measurements { state: meas_state, acc }, &d) {
            Ok(o) => o,
            Err(e) => {
                status = RunStatus::Failed { t, error: e.to_string() };
                break;
            }
        };
        rows.push(TraceRow {
            t,
            ref_pos,
            ref_euler,
            pos: state.pos,
            vel: state.vel,
            euler: state.euler,
            rates: state.rates,
            motors: state.motors,
            omega_c: out.omega_c.into(),
            nu_ang: out.nu_ang.into(),
            nu_acc: out.nu_acc.into(),
            thrust_inc: out.thrust_inc,
            euler_c: out.euler_c,
            force: d.force,
            torque: d.torque,
            rates_f: out.rates_f.into(),
            acc_f: out.acc_f.into(),
        });
        if k + 1 == n {
            break;
        }
        state = match step(&state, params, &out.omega_c.into(), &d) {
            Ok(s) => s,
            Err(e) => {
                status = RunStatus::Failed { t, error: e.to_string() };
                break;
            }
        };
        let too_far = state.pos.iter().any(|v| !(v.abs() <= MAX_POSITION));
        let too_fast = state.rates.iter().any(|v| !(v.abs() <= MAX_RATE));
        if too_far || too_fast {
            let reason = if too_far { "position bound exceeded" } else { "body-rate bound exceeded" };
            status = RunStatus::Diverged { t: t + 1.0 / fs, reason: reason.into() };
            break;
        }
    }
    Ok(SimTrace { scenario: scenario.name.clone(), controller: ctrl.label.clone(), fs, rows, status })
}
