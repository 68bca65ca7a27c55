use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use super::params::{QuadcopterParams, GRAVITY};
use super::state::{DisturbanceSample, QuadState};
use crate::error::{Error, Result};

/// Pitch magnitude beyond which the Euler kinematics are considered singular.
pub const PITCH_LIMIT: f64 = 85.0 * std::f64::consts::PI / 180.0;

/// Body-to-world rotation for ZYX Euler angles `(φ, θ, ψ)`.
pub fn rotation_matrix(euler: [f64; 3]) -> Matrix3<f64> {
    let (sf, cf) = euler[0].sin_cos();
    let (st, ct) = euler[1].sin_cos();
    let (sp, cp) = euler[2].sin_cos();
    Matrix3::new(
        cp * ct,
        cp * st * sf - sp * cf,
        cp * st * cf + sp * sf,
        sp * ct,
        sp * st * sf + cp * cf,
        sp * st * cf - cp * sf,
        -st,
        ct * sf,
        ct * cf,
    )
}

/// Control effectiveness `(G1, G2)` in acceleration units.
pub fn effectiveness_matrices(p: &QuadcopterParams) -> (Matrix4<f64>, Matrix4<f64>) {
    let (kt, kq) = (p.k_tau, p.k_q);
    let raw = Matrix4::new(
        -p.ly * kt, p.ly * kt, p.ly * kt, -p.ly * kt,
        p.lx * kt, p.lx * kt, -p.lx * kt, -p.lx * kt,
        kq, -kq, kq, -kq,
        -kt, -kt, -kt, -kt,
    );
    let scale = Matrix4::from_diagonal(&Vector4::new(
        1.0 / p.inertia[0],
        1.0 / p.inertia[1],
        1.0 / p.inertia[2],
        1.0 / p.mass,
    ));
    let ir = p.i_rzz;
    let mut g2 = Matrix4::zeros();
    g2.set_row(2, &nalgebra::RowVector4::new(ir, -ir, ir, -ir));
    (scale * raw, scale * g2 / p.ts)
}

/// Body torque and signed thrust `f_B` (negative lifts, NED) from motor
/// speeds and accelerations, evaluated directly from rotor physics.
pub fn rotor_wrench(p: &QuadcopterParams, omega: &[f64; 4], omega_dot: &[f64; 4]) -> (Vector3<f64>, f64) {
    let t: Vec<f64> = omega.iter().map(|w| 0.5 * p.k_tau * w * w).collect();
    let q: Vec<f64> = omega.iter().map(|w| 0.5 * p.k_q * w * w).collect();
    let tx = p.ly * (-t[0] + t[1] + t[2] - t[3]);
    let ty = p.lx * (t[0] + t[1] - t[2] - t[3]);
    let tz = q[0] - q[1] + q[2] - q[3] + p.i_rzz * (omega_dot[0] - omega_dot[1] + omega_dot[2] - omega_dot[3]);
    (Vector3::new(tx, ty, tz), -(t[0] + t[1] + t[2] + t[3]))
}

/// Same wrench through `diag(I_B, m)·(½G1ω² + Ts·G2·ω̇)`.
pub fn rotor_wrench_via_effectiveness(p: &QuadcopterParams, omega: &[f64; 4], omega_dot: &[f64; 4]) -> (Vector3<f64>, f64) {
    let (g1, g2) = effectiveness_matrices(p);
    let w2 = Vector4::from_iterator(omega.iter().map(|w| w * w));
    let acc = g1 * w2 * 0.5 + g2 * Vector4::from_column_slice(omega_dot) * p.ts;
    (
        Vector3::new(acc[0] * p.inertia[0], acc[1] * p.inertia[1], acc[2] * p.inertia[2]),
        acc[3] * p.mass,
    )
}

/// Time derivative of the rigid-body part of the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidDerivative {
    pub pos: Vector3<f64>,
    pub vel: Vector3<f64>,
    pub euler: Vector3<f64>,
    pub rates: Vector3<f64>,
}

/// Rigid-body dynamics with the given motor speeds and accelerations.
pub fn dynamics_derivative(
    state: &QuadState,
    p: &QuadcopterParams,
    dist: &DisturbanceSample,
    omega_dot: &[f64; 4],
) -> Result<RigidDerivative> {
    let [phi, theta, _] = state.euler;
    if !(theta.abs() <= PITCH_LIMIT) {
        return Err(Error::Singularity { theta });
    }
    let (torque, f_b) = rotor_wrench(p, &state.motors, omega_dot);
    let r = rotation_matrix(state.euler);
    let bz = r.column(2).into_owned();
    let fd = Vector3::from(dist.force);
    let vel_dot = Vector3::new(0.0, 0.0, GRAVITY) + (bz * f_b + fd) / p.mass;

    let w = Vector3::from(state.rates);
    let inertia = Vector3::from(p.inertia);
    let iw = w.component_mul(&inertia);
    let rates_dot = (torque - w.cross(&iw) + Vector3::from(dist.torque)).component_div(&inertia);

    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let tt = st / ct;
    let euler_dot = Vector3::new(
        w[0] + sf * tt * w[1] + cf * tt * w[2],
        cf * w[1] - sf * w[2],
        (sf * w[1] + cf * w[2]) / ct,
    );
    Ok(RigidDerivative { pos: Vector3::from(state.vel), vel: vel_dot, euler: euler_dot, rates: rates_dot })
}

/// Exact zero-order-hold step of the first-order motor lag, clamped to `[0, ω_max]`.
pub fn actuator_step(omega_c: f64, omega: f64, ts: f64, tau_m: f64, omega_max: f64) -> f64 {
    let a = (-ts / tau_m).exp();
    (omega_c + (omega - omega_c) * a).clamp(0.0, omega_max)
}

/// World-frame acceleration for the current state and motor accelerations.
pub fn linear_acceleration(state: &QuadState, p: &QuadcopterParams, dist: &DisturbanceSample) -> Vector3<f64> {
    let (_, f_b) = rotor_wrench(p, &state.motors, &[0.0; 4]);
    let bz = rotation_matrix(state.euler).column(2).into_owned();
    Vector3::new(0.0, 0.0, GRAVITY) + (bz * f_b + Vector3::from(dist.force)) / p.mass
}

fn add(s: &QuadState, d: &RigidDerivative, h: f64) -> QuadState {
    let mut o = *s;
    for i in 0..3 {
        o.pos[i] += h * d.pos[i];
        o.vel[i] += h * d.vel[i];
        o.euler[i] += h * d.euler[i];
        o.rates[i] += h * d.rates[i];
    }
    o
}

/// Advance the vehicle one sample with a held motor command.
///
/// Motor speeds follow the exact lag response inside the step; the rigid
/// body is integrated with classical RK4 on that motor trajectory.
pub fn step(state: &QuadState, p: &QuadcopterParams, omega_c: &[f64; 4], dist: &DisturbanceSample) -> Result<QuadState> {
    let h = p.ts;
    let cmd = omega_c.map(|w| w.clamp(0.0, p.omega_max));
    let motors_at = |t: f64| -> ([f64; 4], [f64; 4]) {
        let e = (-t / p.tau_m).exp();
        let mut w = [0.0; 4];
        let mut wd = [0.0; 4];
        for i in 0..4 {
            w[i] = cmd[i] + (state.motors[i] - cmd[i]) * e;
            wd[i] = -(state.motors[i] - cmd[i]) * e / p.tau_m;
        }
        (w, wd)
    };
    let eval = |s: &QuadState, t: f64| -> Result<RigidDerivative> {
        let (w, wd) = motors_at(t);
        let mut s = *s;
        s.motors = w;
        dynamics_derivative(&s, p, dist, &wd)
    };
    let k1 = eval(state, 0.0)?;
    let k2 = eval(&add(state, &k1, h / 2.0), h / 2.0)?;
    let k3 = eval(&add(state, &k2, h / 2.0), h / 2.0)?;
    let k4 = eval(&add(state, &k3, h), h)?;
    let mut next = *state;
    for i in 0..3 {
        next.pos[i] += h / 6.0 * (k1.pos[i] + 2.0 * k2.pos[i] + 2.0 * k3.pos[i] + k4.pos[i]);
        next.vel[i] += h / 6.0 * (k1.vel[i] + 2.0 * k2.vel[i] + 2.0 * k3.vel[i] + k4.vel[i]);
        next.euler[i] += h / 6.0 * (k1.euler[i] + 2.0 * k2.euler[i] + 2.0 * k3.euler[i] + k4.euler[i]);
        next.rates[i] += h / 6.0 * (k1.rates[i] + 2.0 * k2.rates[i] + 2.0 * k3.rates[i] + k4.rates[i]);
    }
    for i in 0..4 {
        next.motors[i] = actuator_step(cmd[i], state.motors[i], h, p.tau_m, p.omega_max);
    }
    if next.euler[1].abs() > PITCH_LIMIT {
        return Err(Error::Singularity { theta: next.euler[1] });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> QuadcopterParams {
        QuadcopterParams::preset("bebop-sim").unwrap()
    }

    #[test]
    fn identity_and_yaw_rotation() {
        assert!((rotation_matrix([0.0; 3]) - Matrix3::identity()).amax() < 1e-15);
        let psi: f64 = 0.7;
        let r = rotation_matrix([0.0, 0.0, psi]);
        let want = Matrix3::new(psi.cos(), -psi.sin(), 0.0, psi.sin(), psi.cos(), 0.0, 0.0, 0.0, 1.0);
        assert!((r - want).amax() < 1e-15);
    }

    #[test]
    fn hover_is_equilibrium() {
        let p = params();
        let s = QuadState::hover([0.0; 3], p.hover_speed());
        let d = dynamics_derivative(&s, &p, &DisturbanceSample::default(), &[0.0; 4]).unwrap();
        assert!(d.vel.amax() < 1e-12 && d.rates.amax() < 1e-12);
    }

    #[test]
    fn motors_off_is_free_fall() {
        let p = params();
        let s = QuadState { euler: [0.3, -0.2, 1.0], ..Default::default() };
        let d = dynamics_derivative(&s, &p, &DisturbanceSample::default(), &[0.0; 4]).unwrap();
        assert_eq!(d.vel, Vector3::new(0.0, 0.0, GRAVITY));
    }

    #[test]
    fn principal_axis_rotation_has_no_gyroscopic_term() {
        let p = params();
        let s = QuadState { rates: [0.0, 0.0, 3.0], ..Default::default() };
        let d = dynamics_derivative(&s, &p, &DisturbanceSample::default(), &[0.0; 4]).unwrap();
        assert!(d.rates.amax() < 1e-15);
    }

    #[test]
    fn effectiveness_structure() {
        let p = params();
        let (g1, g2) = effectiveness_matrices(&p);
        let r = p.ly * p.k_tau / p.inertia[0];
        for (j, sign) in [-1.0, 1.0, 1.0, -1.0].iter().enumerate() {
            assert!((g1[(0, j)] - sign * r).abs() < 1e-12);
        }
        for row in [0, 1, 3] {
            assert!(g2.row(row).amax() == 0.0);
        }
        let y = p.i_rzz / (p.inertia[2] * p.ts);
        assert!((g2[(2, 0)] - y).abs() < 1e-12 && (g2[(2, 1)] + y).abs() < 1e-12);
        let w = 400.0;
        let acc = g1 * Vector4::repeat(w * w);
        assert!(acc.fixed_rows::<3>(0).amax() < 1e-9);
        assert!((acc[3] + 4.0 * p.k_tau * w * w / p.mass).abs() < 1e-9);
    }

    #[test]
    fn actuator_lag_values() {
        assert_eq!(actuator_step(300.0, 300.0, 0.002, 0.02, 1000.0), 300.0);
        let tau = 0.02;
        let y = actuator_step(100.0, 0.0, tau, tau, 1000.0);
        assert!((y - 100.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert_eq!(actuator_step(2000.0, 990.0, 0.1, 0.02, 1000.0), 1000.0);
    }

    #[test]
    fn pitch_singularity_reported() {
        let p = params();
        let s = QuadState { euler: [0.0, 1.5, 0.0], ..Default::default() };
        assert!(matches!(
            dynamics_derivative(&s, &p, &DisturbanceSample::default(), &[0.0; 4]),
            Err(Error::Singularity { .. })
        ));
    }
}
