use nalgebra::{DMatrix, Matrix4};
use serde::{Deserialize, Serialize};

use super::log::FlightLog;
use crate::error::{Error, Result};
use crate::vehicle::{FilterParams, MeasurementFilter, QuadcopterParams};

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const COARSE_POINTS: usize = 60;

/// Exact zero-order-hold response of `Â(s) = 1/(τs + 1)` to a throttle
/// trace, scaled to motor speed. The filter starts converged on the first
/// command.
pub fn estimate_motor_speed(throttle: &[[f64; 4]], tau: f64, speed_scale: f64, fs: f64) -> Result<Vec<[f64; 4]>> {
    if !(tau > 0.0 && fs > 0.0) {
        return Err(Error::InvalidParameter("motor time constant and sample rate must be positive".into()));
    }
    let a = (-1.0 / (fs * tau)).exp();
    let mut out = Vec::with_capacity(throttle.len());
    let Some(first) = throttle.first() else {
        return Ok(out);
    };
    let mut w = first.map(|u| u * speed_scale);
    let mut prev = *first;
    for u in throttle {
        for i in 0..4 {
            w[i] = speed_scale * prev[i] + (w[i] - speed_scale * prev[i]) * a;
        }
        out.push(w);
        prev = *u;
    }
    Ok(out)
}

/// Regression data `y = Ĝ₁₂·Δω_f`, one row per usable sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    /// `[ΔΩ̇_f, Δa_z,f]`
    pub y: Vec<[f64; 4]>,
    pub d_omega: Vec<[f64; 4]>,
}

/// Filter every channel with `H`, differentiate the filtered rates, and take
/// sample-to-sample increments. The filters start at the steady state of the
/// first sample, which is inconsistent for the differentiated rates, so the
/// first `16/(ζωn)` seconds are dropped.
pub fn build_increments(log: &FlightLog, filter: &FilterParams, omega: &[[f64; 4]]) -> Result<Increments> {
    if omega.len() != log.len() {
        return Err(Error::Dimension("motor speed trace does not match the log".into()));
    }
    if log.len() < 3 {
        return Err(Error::InvalidParameter("log too short for increments".into()));
    }
    let settle = (16.0 / (filter.zeta * filter.wn) * log.fs).ceil() as usize;
    if log.len() < settle + 3 {
        return Err(Error::InvalidParameter("log shorter than the filter settling time".into()));
    }
    let mut h = MeasurementFilter::new(filter, log.fs, 8)?;
    let mut prev_rate: Option<[f64; 3]> = None;
    let mut prev: Option<([f64; 4], [f64; 4])> = None;
    let (mut y, mut d_omega) = (Vec::with_capacity(log.len()), Vec::with_capacity(log.len()));
    for k in 0..log.len() {
        let g = log.gyro[k];
        let raw = [g[0], g[1], g[2], log.acc_z[k], omega[k][0], omega[k][1], omega[k][2], omega[k][3]];
        let f = h.step(&raw);
        let rate = [f[0], f[1], f[2]];
        let w = [f[4], f[5], f[6], f[7]];
        if let Some(pr) = prev_rate {
            let z = [(rate[0] - pr[0]) * log.fs, (rate[1] - pr[1]) * log.fs, (rate[2] - pr[2]) * log.fs, f[3]];
            if let (Some((pz, pw)), true) = (prev, k >= settle) {
                y.push([z[0] - pz[0], z[1] - pz[1], z[2] - pz[2], z[3] - pz[3]]);
                d_omega.push([w[0] - pw[0], w[1] - pw[1], w[2] - pw[2], w[3] - pw[3]]);
            }
            prev = Some((z, w));
        }
        prev_rate = Some(rate);
    }
    Ok(Increments { y, d_omega })
}

/// Least-squares `Ĝ₁₂` for fixed increments, with the residual Frobenius norm.
pub fn fit_effectiveness(inc: &Increments) -> Result<(Matrix4<f64>, f64)> {
    let n = inc.y.len();
    let x = DMatrix::from_fn(n, 4, |i, j| inc.d_omega[i][j]);
    let y = DMatrix::from_fn(n, 4, |i, j| inc.y[i][j]);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || svd.singular_values.min() < smax * 1e-12 {
        return Err(Error::Singular("motor increments do not excite all four motors".into()));
    }
    let gt = svd.solve(&y, smax * 1e-14).map_err(|e| Error::Singular(e.to_string()))?;
    let res = (&y - &x * &gt).norm();
    Ok((Matrix4::from_fn(|i, j| gt[(j, i)]), res))
}

fn centered_norm(y: &[[f64; 4]]) -> f64 {
    let n = y.len() as f64;
    let mut mean = [0.0; 4];
    for r in y {
        for j in 0..4 {
            mean[j] += r[j] / n;
        }
    }
    y.iter().map(|r| (0..4).map(|j| (r[j] - mean[j]).powi(2)).sum::<f64>()).sum::<f64>().sqrt()
}

/// Estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    pub filter: FilterParams,
    /// Throttle to motor speed factor of `Â`.
    pub speed_scale: f64,
    /// Data-sheet motor time constant used for the analytic start.
    pub tau_init: f64,
    /// Search bracket for the motor time constant, s.
    pub tau_bracket: [f64; 2],
    /// Relative width of the final τ bracket.
    pub tol: f64,
    pub max_iter: usize,
}

impl EstimationConfig {
    pub fn for_vehicle(p: &QuadcopterParams) -> Self {
        Self { filter: p.filter, speed_scale: 1.0, tau_init: p.tau_m, tau_bracket: [1.0 / 200.0, 1.0], tol: 1e-7, max_iter: 200 }
    }
}

/// Estimated `Φ = {τ̂_m, Ĝ₁₂}` with goodness of fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub tau_m: f64,
    /// Row-major.
    pub g12: [[f64; 4]; 4],
    pub residual: f64,
    /// `100·(1 − ‖y − ŷ‖/‖y − ȳ‖)`
    pub fit_pct: f64,
    pub converged: bool,
    pub iterations: usize,
    /// The yaw row is fitted without the dropped lag term and is not trusted.
    pub yaw_low_confidence: bool,
}

impl EstimationResult {
    pub fn g12_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.g12[i][j])
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let r: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if !(r.tau_m > 0.0) {
            return Err(Error::InvalidParameter("estimated time constant must be positive".into()));
        }
        Ok(r)
    }

    /// Vehicle parameters with the estimated motor time constant.
    pub fn apply_to(&self, p: &QuadcopterParams) -> Result<QuadcopterParams> {
        let mut out = p.clone();
        out.tau_m = self.tau_m;
        out.validate()?;
        Ok(out)
    }
}

fn evaluate(log: &FlightLog, cfg: &EstimationConfig, tau: f64) -> Result<(Matrix4<f64>, f64, f64)> {
    let omega = estimate_motor_speed(&log.throttle, tau, cfg.speed_scale, log.fs)?;
    let inc = build_increments(log, &cfg.filter, &omega)?;
    let (g, res) = fit_effectiveness(&inc)?;
    Ok((g, res, centered_norm(&inc.y)))
}

fn result(tau: f64, g: Matrix4<f64>, res: f64, scale: f64, converged: bool, iterations: usize) -> EstimationResult {
    EstimationResult {
        tau_m: tau,
        g12: std::array::from_fn(|i| std::array::from_fn(|j| g[(i, j)])),
        residual: res,
        fit_pct: if scale > 0.0 { 100.0 * (1.0 - res / scale) } else { 100.0 },
        converged,
        iterations,
        yaw_low_confidence: true,
    }
}

/// Analytic pseudo-inverse solution of the increment equation. Uses the
/// logged motor speeds when present, otherwise `Â` at the data-sheet τ.
pub fn analytic_initialization(log: &FlightLog, cfg: &EstimationConfig) -> Result<EstimationResult> {
    match &log.motor_speed {
        Some(w) => {
            let inc = build_increments(log, &cfg.filter, w)?;
            let (g, res) = fit_effectiveness(&inc)?;
            Ok(result(cfg.tau_init, g, res, centered_norm(&inc.y), true, 0))
        }
        None => {
            let (g, res, sc) = evaluate(log, cfg, cfg.tau_init)?;
            Ok(result(cfg.tau_init, g, res, sc, true, 0))
        }
    }
}

/// Minimize the increment residual over `{τ̂_m, Ĝ₁₂}`.
///
/// For fixed τ the best `Ĝ₁₂` is linear least squares, so only τ is searched:
/// a log-spaced scan of the bracket, then golden-section refinement on ln τ
/// around the best scan point. `init` is kept if nothing improves on it.
pub fn estimate_parameters(log: &FlightLog, cfg: &EstimationConfig, init: Option<&EstimationResult>) -> Result<EstimationResult> {
    if log.duration() < 2.0 - 1e-9 {
        return Err(Error::InvalidParameter(format!("log is {:.3} s long, need at least 2 s", log.duration())));
    }
    let [lo, hi] = cfg.tau_bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter("time constant bracket must satisfy 0 < lo < hi".into()));
    }
    let init = match init {
        Some(r) => r.clone(),
        None => analytic_initialization(log, cfg)?,
    };
    let (l0, l1) = (lo.ln(), hi.ln());
    let xs: Vec<f64> = (0..COARSE_POINTS).map(|i| l0 + (l1 - l0) * i as f64 / (COARSE_POINTS - 1) as f64).collect();
    let cost = |x: f64| evaluate(log, cfg, x.exp()).map(|r| r.1).unwrap_or(f64::INFINITY);
    let vals: Vec<f64> = xs.iter().map(|&x| cost(x)).collect();
    let best = (0..COARSE_POINTS).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);

    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(COARSE_POINTS - 1)];
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    let mut iterations = 0;
    while b - a > cfg.tol && iterations < cfg.max_iter {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = cost(x2);
        }
        iterations += 1;
    }
    let converged = b - a <= cfg.tol;
    let tau = (0.5 * (a + b)).exp();
    let (g, res, sc) = evaluate(log, cfg, tau)?;
    if res <= init.residual || !init.residual.is_finite() {
        Ok(result(tau, g, res, sc, converged, iterations))
    } else {
        Ok(EstimationResult { converged, iterations, ..init })
    }
}
