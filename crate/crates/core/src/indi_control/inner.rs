use nalgebra::{DMatrix, Matrix3x4, Matrix4, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::linsys::{condition_number, pseudo_inverse};
use crate::vehicle::{effectiveness_matrices, QuadcopterParams};

/// Largest condition number accepted for the effectiveness inversion.
pub const MAX_CONDITION: f64 = 1e10;

/// Backward-difference differentiator for filtered body rates.
#[derive(Debug, Clone)]
pub struct AngularAccel {
    ts: f64,
    prev: Option<Vector3<f64>>,
}

impl AngularAccel {
    pub fn new(ts: f64) -> Self {
        Self { ts, prev: None }
    }

    /// Derivative estimate for the newest filtered sample; zero on the first.
    pub fn step(&mut self, rates_f: Vector3<f64>) -> Vector3<f64> {
        let out = match self.prev {
            Some(p) => (rates_f - p) / self.ts,
            None => Vector3::zeros(),
        };
        self.prev = Some(rates_f);
        out
    }
}

/// Batch form: one derivative per sample after the first.
pub fn angular_accel_from_rates(rates_f: &[Vector3<f64>], ts: f64) -> Vec<Vector3<f64>> {
    rates_f.windows(2).map(|w| (w[1] - w[0]) / ts).collect()
}

/// Rate-loop inversion: turns virtual angular accelerations and a thrust
/// increment into motor speed commands.
#[derive(Debug, Clone)]
pub struct InnerIndi {
    g12: Matrix4<f64>,
    g12_pinv: Matrix4<f64>,
    g2: Matrix4<f64>,
    condition: f64,
    omega_max: f64,
    lag: Vector4<f64>,
}

impl InnerIndi {
    pub fn new(g12: Matrix4<f64>, g2: Matrix4<f64>, omega_max: f64) -> Result<Self> {
        let dm = DMatrix::from_column_slice(4, 4, g12.as_slice());
        let condition = condition_number(&dm);
        if !(condition < MAX_CONDITION) {
            return Err(Error::Singular(format!("effectiveness matrix condition number {condition:.3e}")));
        }
        let p = pseudo_inverse(&dm);
        Ok(Self {
            g12,
            g12_pinv: Matrix4::from_column_slice(p.as_slice()),
            g2,
            condition,
            omega_max,
            lag: Vector4::zeros(),
        })
    }

    /// Model linearized at hover, `Ĝ₁₂ = scale·(G1·diag(ω_hover) + G2)`.
    /// `scale` lets tests inject a model error.
    pub fn from_params(p: &QuadcopterParams, scale: f64) -> Result<Self> {
        let (g1, g2) = effectiveness_matrices(p);
        let g12 = (g1 * p.hover_speed() + g2) * scale;
        Self::new(g12, g2 * scale, p.omega_max)
    }

    pub fn g12(&self) -> &Matrix4<f64> {
        &self.g12
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn reset(&mut self) {
        self.lag = Vector4::zeros();
    }

    /// `ω_c = ω_f + Ĝ₁₂†([ν − Ω̇_f; T̃] + G2·L(ω_c − ω_f))`, clamped to motor limits.
    pub fn step(&mut self, nu: Vector3<f64>, thrust_inc: f64, omega_f: Vector4<f64>, omega_dot_f: Vector3<f64>) -> Vector4<f64> {
        let e = nu - omega_dot_f;
        let rhs = Vector4::new(e[0], e[1], e[2], thrust_inc) + self.g2 * self.lag;
        let cmd = (omega_f + self.g12_pinv * rhs).map(|w| w.clamp(0.0, self.omega_max));
        self.lag = cmd - omega_f;
        cmd
    }

    /// Rows of `Ĝ₁₂` mapping speed increments to angular accelerations.
    pub fn angular_rows(&self) -> Matrix3x4<f64> {
        self.g12.fixed_rows::<3>(0).into_owned()
    }
}
