use nalgebra::{Vector3, Vector4};
use serde::{Deserialize, Serialize};

use super::inner::{AngularAccel, InnerIndi};
use super::outer::OuterIndi;
use crate::error::{Error, Result};
use crate::linsys::{discretize_tustin, DiscreteRunner};
use crate::synthesis::{LoopController, LoopKind};
use crate::vehicle::{DisturbanceSample, MeasurementFilter, QuadState, QuadcopterParams};

/// Which references drive the attitude loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlightMode {
    /// Roll and pitch commands come from the guidance loop.
    #[default]
    Position,
    /// Roll and pitch follow the attitude reference; guidance only holds altitude.
    Attitude,
}

/// Bounds on the virtual controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualLimits {
    pub angular: f64,
    pub linear: f64,
}

impl Default for VirtualLimits {
    fn default() -> Self {
        Self { angular: 2000.0, linear: 30.0 }
    }
}

/// Reference set for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct References {
    pub pos: [f64; 3],
    pub euler: [f64; 3],
}

/// Sensor values fed to the stack. `acc` is the world-frame acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurements {
    pub state: QuadState,
    pub acc: Vector3<f64>,
}

/// Everything the stack computed during one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackOutput {
    pub omega_c: Vector4<f64>,
    pub nu_ang: Vector3<f64>,
    pub nu_acc: Vector3<f64>,
    pub thrust_inc: f64,
    pub euler_c: [f64; 3],
    pub rates_f: Vector3<f64>,
    pub rates_dot_f: Vector3<f64>,
    pub motors_f: Vector4<f64>,
    pub acc_f: Vector3<f64>,
    pub euler_f: [f64; 3],
}

fn runner(c: &LoopController, fs: f64) -> Result<DiscreteRunner> {
    DiscreteRunner::new(&discretize_tustin(&c.k, fs)?)
}

/// Cascaded linear controllers wrapped around the two inversion blocks.
#[derive(Debug, Clone)]
pub struct ControllerStack {
    attitude: Vec<DiscreteRunner>,
    guidance: Vec<DiscreteRunner>,
    inner: InnerIndi,
    outer: OuterIndi,
    filter: MeasurementFilter,
    diff: AngularAccel,
    mode: FlightMode,
    limits: VirtualLimits,
    k_tau: f64,
}

impl ControllerStack {
    /// `model_scale` multiplies the effectiveness model used by the inversion.
    pub fn new(
        params: &QuadcopterParams,
        attitude: &LoopController,
        guidance: &LoopController,
        mode: FlightMode,
        model_scale: f64,
    ) -> Result<Self> {
        if attitude.loop_kind != LoopKind::Attitude || guidance.loop_kind != LoopKind::Guidance {
            return Err(Error::InvalidParameter("controller loop kinds do not match their slots".into()));
        }
        let fs = params.fs();
        let att = runner(attitude, fs)?;
        let gui = runner(guidance, fs)?;
        Ok(Self {
            attitude: vec![att; 3],
            guidance: vec![gui; 3],
            inner: InnerIndi::from_params(params, model_scale)?,
            outer: OuterIndi::new(params.mass),
            filter: MeasurementFilter::new(&params.filter, fs, 13)?,
            diff: AngularAccel::new(params.ts),
            mode,
            limits: VirtualLimits::default(),
            k_tau: params.k_tau,
        })
    }

    pub fn with_limits(mut self, limits: VirtualLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn inner(&self) -> &InnerIndi {
        &self.inner
    }

    /// One sample of the full cascade: guidance controller, outer inversion,
    /// attitude controller, inner inversion.
    pub fn step(&mut self, refs: &References, meas: &Measurements, dist: &DisturbanceSample) -> Result<StackOutput> {
        let s = &meas.state;
        let mut raw = [0.0; 13];
        raw[0..3].copy_from_slice(&s.rates);
        raw[3..7].copy_from_slice(&s.motors);
        raw[7..10].copy_from_slice(meas.acc.as_slice());
        raw[10..13].copy_from_slice(&s.euler);
        let f = self.filter.step(&raw);
        let rates_f = Vector3::new(f[0], f[1], f[2]);
        let motors_f = Vector4::new(f[3], f[4], f[5], f[6]);
        let acc_f = Vector3::new(f[7], f[8], f[9]);
        let euler_f = [f[10], f[11], f[12]];
        let rates_dot_f = self.diff.step(rates_f);

        let lin = self.limits.linear;
        let mut nu_acc = Vector3::zeros();
        for i in 0..3 {
            let u = self.guidance[i].step(&[refs.pos[i] - s.pos[i], s.vel[i]])[0];
            nu_acc[i] = (u + dist.nu_acc[i]).clamp(-lin, lin);
        }
        if self.mode == FlightMode::Attitude {
            nu_acc[0] = acc_f[0];
            nu_acc[1] = acc_f[1];
        }
        let thrust_est = 0.5 * self.k_tau * motors_f.map(|w| w * w).sum();
        let oc = self.outer.step(nu_acc, acc_f, euler_f, thrust_est)?;
        let euler_c = match self.mode {
            FlightMode::Position => [oc.phi_c, oc.theta_c, refs.euler[2]],
            FlightMode::Attitude => refs.euler,
        };

        let ang = self.limits.angular;
        let mut nu_ang = Vector3::zeros();
        for i in 0..3 {
            let u = self.attitude[i].step(&[euler_c[i] - s.euler[i], s.rates[i]])[0];
            nu_ang[i] = (u + dist.nu_ang[i]).clamp(-ang, ang);
        }
        let omega_c = self.inner.step(nu_ang, oc.thrust_inc, motors_f, rates_dot_f);
        if omega_c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite motor command".into()));
        }
        Ok(StackOutput {
            omega_c,
            nu_ang,
            nu_acc,
            thrust_inc: oc.thrust_inc,
            euler_c,
            rates_f,
            rates_dot_f,
            motors_f,
            acc_f,
            euler_f,
        })
    }
}
