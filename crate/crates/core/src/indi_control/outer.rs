use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::vehicle::PITCH_LIMIT;

/// Attitude command saturation, rad.
pub const TILT_LIMIT: f64 = 0.78;

/// Result of one outer inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterCommand {
    /// Increment of `f_B/m`, m/s² (negative is more lift in NED).
    pub thrust_inc: f64,
    pub phi_c: f64,
    pub theta_c: f64,
}

/// Jacobian of the thrust acceleration `(f_B/m)·b_z` with respect to
/// `(f_B, φ, θ)`, for thrust magnitude `thrust = −f_B > 0`.
pub fn thrust_jacobian(mass: f64, thrust: f64, euler: [f64; 3]) -> Matrix3<f64> {
    let (sf, cf) = euler[0].sin_cos();
    let (st, ct) = euler[1].sin_cos();
    let (sp, cp) = euler[2].sin_cos();
    let bz = Vector3::new(cf * st * cp + sf * sp, cf * st * sp - sf * cp, cf * ct);
    let dbz_phi = Vector3::new(-sf * st * cp + cf * sp, -sf * st * sp - cf * cp, -sf * ct);
    let dbz_theta = Vector3::new(cf * ct * cp, cf * ct * sp, -cf * st);
    let f_b = -thrust;
    Matrix3::from_columns(&[bz / mass, dbz_phi * (f_b / mass), dbz_theta * (f_b / mass)])
}

/// Guidance-loop inversion of the translational dynamics.
#[derive(Debug, Clone)]
pub struct OuterIndi {
    pub mass: f64,
    pub tilt_limit: f64,
}

impl OuterIndi {
    pub fn new(mass: f64) -> Self {
        Self { mass, tilt_limit: TILT_LIMIT }
    }

    /// Solve `ν − a_f = J·[Δf_B, Δφ, Δθ]` around the filtered state.
    pub fn step(&self, nu: Vector3<f64>, acc_f: Vector3<f64>, euler_f: [f64; 3], thrust_est: f64) -> Result<OuterCommand> {
        if !(thrust_est > 0.0) {
            return Err(Error::InvalidParameter(format!("thrust estimate must be positive, got {thrust_est}")));
        }
        if euler_f[1].abs() > PITCH_LIMIT {
            return Err(Error::Singularity { theta: euler_f[1] });
        }
        let j = thrust_jacobian(self.mass, thrust_est, euler_f);
        let inc = j
            .try_inverse()
            .ok_or_else(|| Error::Singular("thrust Jacobian is singular".into()))?
            * (nu - acc_f);
        let lim = self.tilt_limit;
        Ok(OuterCommand {
            thrust_inc: inc[0] / self.mass,
            phi_c: (euler_f[0] + inc[1]).clamp(-lim, lim),
            theta_c: (euler_f[1] + inc[2]).clamp(-lim, lim),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::GRAVITY;

    fn thrust_acc(mass: f64, thrust: f64, e: [f64; 3]) -> Vector3<f64> {
        crate::vehicle::rotation_matrix(e).column(2) * (-thrust / mass)
    }

    #[test]
    fn jacobian_matches_finite_difference() {
        let (m, t, e) = (0.5, 5.3, [0.2, -0.3, 0.7]);
        let j = thrust_jacobian(m, t, e);
        let h = 1e-6;
        let base = thrust_acc(m, t, e);
        let d_fb = (thrust_acc(m, t - h, e) - base) / h;
        let d_phi = (thrust_acc(m, t, [e[0] + h, e[1], e[2]]) - base) / h;
        let d_theta = (thrust_acc(m, t, [e[0], e[1] + h, e[2]]) - base) / h;
        assert!((j.column(0) - d_fb).amax() < 1e-5);
        assert!((j.column(1) - d_phi).amax() < 1e-5);
        assert!((j.column(2) - d_theta).amax() < 1e-5);
    }

    #[test]
    fn matched_request_holds_commands() {
        let o = OuterIndi::new(0.5);
        let a = Vector3::new(0.3, -0.2, 0.1);
        let c = o.step(a, a, [0.1, -0.05, 0.0], 5.0).unwrap();
        assert_eq!(c, OuterCommand { thrust_inc: 0.0, phi_c: 0.1, theta_c: -0.05 });
    }

    #[test]
    fn vertical_request_at_hover() {
        let o = OuterIndi::new(0.5);
        let c = o.step(Vector3::new(0.0, 0.0, -1.5), Vector3::zeros(), [0.0; 3], 0.5 * GRAVITY).unwrap();
        assert!((c.thrust_inc + 1.5).abs() < 1e-12);
        assert!(c.phi_c.abs() < 1e-15 && c.theta_c.abs() < 1e-15);
    }

    #[test]
    fn forward_request_pitches_nose_down() {
        let o = OuterIndi::new(0.5);
        let c = o.step(Vector3::new(100.0, 0.0, 0.0), Vector3::zeros(), [0.0; 3], 0.5 * GRAVITY).unwrap();
        assert_eq!(c.theta_c, -TILT_LIMIT);
    }
}
