//! Full-order H∞ synthesis by γ-iteration on the two Riccati equations.

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use super::plant::GeneralizedPlant;
use super::riccati::{min_sym_eigenvalue, solve_from_hamiltonian};
use crate::error::{Error, Result};
use crate::linsys::{eigenvalues, Domain, StateSpaceSystem};

/// Size of the feedthrough perturbation used when D12/D21 lose rank.
pub const REGULARIZATION_EPS: f64 = 1e-6;
const MAX_GAMMA: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullOrderOptions {
    /// Relative width of the final γ bracket.
    pub gamma_tol: f64,
    /// The controller is built at `γ_opt·(1 + backoff)`.
    pub backoff: f64,
}

impl Default for FullOrderOptions {
    fn default() -> Self {
        Self { gamma_tol: 1e-4, backoff: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullOrderDesign {
    pub k: StateSpaceSystem,
    /// Level at which the controller was built; bounds the closed-loop norm.
    pub gamma: f64,
    /// Smallest feasible level found by bisection.
    pub gamma_opt: f64,
    /// Recomputed closed-loop norm `w → z`.
    pub closed_loop_norm: f64,
    /// Feedthrough regularization applied, if any.
    pub regularization: Option<f64>,
}

struct Parts {
    a: DMatrix<f64>,
    b1: DMatrix<f64>,
    b2: DMatrix<f64>,
    c1: DMatrix<f64>,
    c2: DMatrix<f64>,
    d11: DMatrix<f64>,
    d12: DMatrix<f64>,
    d21: DMatrix<f64>,
}

fn inv(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    m.clone().try_inverse()
}

fn hcat(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(x.nrows().max(y.nrows()), x.ncols() + y.ncols());
    m.view_mut((0, 0), x.shape()).copy_from(x);
    m.view_mut((0, x.ncols()), y.shape()).copy_from(y);
    m
}

fn vcat(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(x.nrows() + y.nrows(), x.ncols().max(y.ncols()));
    m.view_mut((0, 0), x.shape()).copy_from(x);
    m.view_mut((x.nrows(), 0), y.shape()).copy_from(y);
    m
}

fn sub(m: &DMatrix<f64>, r0: usize, r1: usize, c0: usize, c1: usize) -> DMatrix<f64> {
    m.view((r0, c0), (r1 - r0, c1 - c0)).into_owned()
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.amax()
}

/// Orthonormal basis of the complement of the columns of `q` (orthonormal).
fn complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let p = q.nrows();
    let mut basis: Vec<nalgebra::DVector<f64>> = q.column_iter().map(|c| c.into_owned()).collect();
    let mut out = Vec::new();
    while basis.len() < p {
        let mut best: Option<nalgebra::DVector<f64>> = None;
        for j in 0..p {
            let mut v = nalgebra::DVector::zeros(p);
            v[j] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dot(&v);
                    v -= b * proj;
                }
            }
            if best.as_ref().is_none_or(|bv| v.norm() > bv.norm()) {
                best = Some(v);
            }
        }
        let v = best.expect("p > 0");
        let v = &v / v.norm();
        basis.push(v.clone());
        out.push(v);
    }
    if out.is_empty() {
        DMatrix::zeros(p, 0)
    } else {
        DMatrix::from_columns(&out)
    }
}

fn partition(p: &StateSpaceSystem, n_meas: usize, n_ctrl: usize) -> Result<Parts> {
    let (a, b, c, d, _) = p.clone().into_parts();
    let m1 = b.ncols() - n_ctrl;
    let p1 = c.nrows() - n_meas;
    let (m, pp) = (b.ncols(), c.nrows());
    let d22 = sub(&d, p1, pp, m1, m);
    if d22.amax() > 0.0 {
        return Err(Error::Synthesis("D22 must be zero (controller output may not feed measurements directly)".into()));
    }
    Ok(Parts {
        b1: sub(&b, 0, b.nrows(), 0, m1),
        b2: sub(&b, 0, b.nrows(), m1, m),
        c1: sub(&c, 0, p1, 0, c.ncols()),
        c2: sub(&c, p1, pp, 0, c.ncols()),
        d11: sub(&d, 0, p1, 0, m1),
        d12: sub(&d, 0, p1, m1, m),
        d21: sub(&d, p1, pp, 0, m1),
        a,
    })
}

fn rank_deficient(m: &DMatrix<f64>, need: usize) -> bool {
    if m.nrows() == 0 || m.ncols() == 0 {
        return need > 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.amax();
    sv.len() < need || sv.iter().filter(|s| **s > 1e-9 * smax.max(1e-300)).count() < need
}

/// Add `eps` feedthrough on the control and measurement channels when
/// D12 lacks full column rank or D21 lacks full row rank.
fn regularize(parts: Parts, eps: f64) -> (Parts, bool) {
    let m2 = parts.b2.ncols();
    let p2 = parts.c2.nrows();
    let mut parts = parts;
    let mut changed = false;
    if rank_deficient(&parts.d12, m2) {
        let n = parts.a.nrows();
        let m1 = parts.b1.ncols();
        parts.c1 = vcat(&parts.c1, &DMatrix::zeros(m2, n));
        parts.d11 = vcat(&parts.d11, &DMatrix::zeros(m2, m1));
        parts.d12 = vcat(&parts.d12, &(DMatrix::identity(m2, m2) * eps));
        changed = true;
    }
    if rank_deficient(&parts.d21, p2) {
        let n = parts.a.nrows();
        let p1 = parts.c1.nrows();
        parts.b1 = hcat(&parts.b1, &DMatrix::zeros(n, p2));
        parts.d11 = hcat(&parts.d11, &DMatrix::zeros(p1, p2));
        parts.d21 = hcat(&parts.d21, &(DMatrix::identity(p2, p2) * eps));
        changed = true;
    }
    (parts, changed)
}

/// Scaled problem data with `D12 = [0; I]` and `D21 = [0, I]`.
struct Scaled {
    p: Parts,
    ru: DMatrix<f64>,
    ry: DMatrix<f64>,
}

fn scale(parts: &Parts) -> Result<Scaled> {
    let m2 = parts.b2.ncols();
    let p2 = parts.c2.nrows();
    let svd12 = parts.d12.clone().svd(true, true);
    let u1 = svd12.u.clone().expect("u");
    let s12 = &svd12.singular_values;
    let v12 = svd12.v_t.clone().expect("v_t").transpose();
    if s12.len() != m2 || s12.min() <= 0.0 {
        return Err(Error::Synthesis("D12 does not have full column rank".into()));
    }
    let ru = v12 * DMatrix::from_diagonal(&s12.map(|v| 1.0 / v));
    let u2 = complement(&u1);
    let th = vcat(&u2.transpose(), &u1.transpose());

    let svd21 = parts.d21.clone().svd(true, true);
    let uy = svd21.u.clone().expect("u");
    let s21 = &svd21.singular_values;
    let v1 = svd21.v_t.clone().expect("v_t").transpose();
    if s21.len() != p2 || s21.min() <= 0.0 {
        return Err(Error::Synthesis("D21 does not have full row rank".into()));
    }
    let ry = DMatrix::from_diagonal(&s21.map(|v| 1.0 / v)) * uy.transpose();
    let v2 = complement(&v1);
    let tw = hcat(&v2, &v1);

    let p = Parts {
        a: parts.a.clone(),
        b1: &parts.b1 * &tw,
        b2: &parts.b2 * &ru,
        c1: &th * &parts.c1,
        c2: &ry * &parts.c2,
        d11: &th * &parts.d11 * &tw,
        d12: &th * &parts.d12 * &ru,
        d21: &ry * &parts.d21 * &tw,
    };
    Ok(Scaled { p, ru, ry })
}

type Realization = (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>);

/// Central controller at level `gamma`, or `None` if `gamma` is infeasible.
fn central(s: &Scaled, gamma: f64) -> Option<Realization> {
    let p = &s.p;
    let n = p.a.nrows();
    let (m1, m2) = (p.b1.ncols(), p.b2.ncols());
    let (p1, p2) = (p.c1.nrows(), p.c2.nrows());
    let (m1a, p1a) = (m1 - p2, p1 - m2);
    let d1111 = sub(&p.d11, 0, p1a, 0, m1a);
    let d1112 = sub(&p.d11, 0, p1a, m1a, m1);
    let d1121 = sub(&p.d11, p1a, p1, 0, m1a);
    let d1122 = sub(&p.d11, p1a, p1, m1a, m1);
    let floor = spectral_norm(&hcat(&d1111, &d1112)).max(spectral_norm(&vcat(&d1111, &d1121)));
    if gamma <= floor {
        return None;
    }
    let g2 = gamma * gamma;
    let b = hcat(&p.b1, &p.b2);
    let c = vcat(&p.c1, &p.c2);
    let d1d = hcat(&p.d11, &p.d12);
    let dd1 = vcat(&p.d11, &p.d21);

    let mut r = d1d.transpose() * &d1d;
    for i in 0..m1 {
        r[(i, i)] -= g2;
    }
    let mut rt = &dd1 * dd1.transpose();
    for i in 0..p1 {
        rt[(i, i)] -= g2;
    }
    let ri = inv(&r)?;
    let rti = inv(&rt)?;

    let zero = DMatrix::<f64>::zeros(n, n);
    let hx0 = vcat(&hcat(&p.a, &zero), &hcat(&(-(p.c1.transpose() * &p.c1)), &(-p.a.transpose())));
    let hx = hx0
        - vcat(&b, &(-(p.c1.transpose() * &d1d))) * &ri * hcat(&(d1d.transpose() * &p.c1), &b.transpose());
    let hy0 = vcat(&hcat(&p.a.transpose(), &zero), &hcat(&(-(&p.b1 * p.b1.transpose())), &(-&p.a)));
    let hy = hy0
        - vcat(&c.transpose(), &(-(&p.b1 * dd1.transpose()))) * &rti * hcat(&(&dd1 * p.b1.transpose()), &c);

    let x = solve_from_hamiltonian(&hx)?;
    let y = solve_from_hamiltonian(&hy)?;
    let tol = |m: &DMatrix<f64>| -1e-8 * m.amax().max(1.0);
    if min_sym_eigenvalue(&x) < tol(&x) || min_sym_eigenvalue(&y) < tol(&y) {
        return None;
    }
    let rho = eigenvalues(&(&x * &y)).iter().map(|l| l.norm()).fold(0.0, f64::max);
    if rho >= g2 {
        return None;
    }

    let f = -(&ri * (d1d.transpose() * &p.c1 + b.transpose() * &x));
    let l = -((&p.b1 * dd1.transpose() + &y * c.transpose()) * &rti);
    let f12 = sub(&f, m1a, m1, 0, n);
    let f2 = sub(&f, m1, m1 + m2, 0, n);
    let l12 = sub(&l, 0, n, p1a, p1);
    let l2 = sub(&l, 0, n, p1, p1 + p2);

    let mut g_p = -(&d1111 * d1111.transpose());
    for i in 0..p1a {
        g_p[(i, i)] += g2;
    }
    let mut g_m = -(d1111.transpose() * &d1111);
    for i in 0..m1a {
        g_m[(i, i)] += g2;
    }
    let g_p_inv = inv(&g_p)?;
    let g_m_inv = inv(&g_m)?;
    let d11h = -(&d1121 * d1111.transpose() * &g_p_inv * &d1112) - &d1122;
    let m12 = DMatrix::identity(m2, m2) - &d1121 * &g_m_inv * d1121.transpose();
    let m21 = DMatrix::identity(p2, p2) - d1112.transpose() * &g_p_inv * &d1112;
    let d12h = Cholesky::new(m12)?.l();
    let d21h = Cholesky::new(m21)?.l().transpose();
    let d12h_inv = inv(&d12h)?;
    let d21h_inv = inv(&d21h)?;

    let zinv = DMatrix::identity(n, n) - &y * &x / g2;
    let z = inv(&zinv)?;
    let b2h = &z * (&p.b2 + &l12) * &d12h;
    let c2h = -(&d21h * (&p.c2 + &f12));
    let b1h = -(&z * &l2) + &b2h * &d12h_inv * &d11h;
    let c1h = &f2 + &d11h * &d21h_inv * &c2h;
    let ah = &p.a + &b * &f + &b1h * &d21h_inv * &c2h;
    let out = (ah, &b1h * &s.ry, &s.ru * &c1h, &s.ru * &d11h * &s.ry);
    let finite = |m: &DMatrix<f64>| m.iter().all(|v| v.is_finite());
    (finite(&out.0) && finite(&out.1) && finite(&out.2) && finite(&out.3)).then_some(out)
}

/// Optimal full-order controller for a generalized plant.
pub fn synth_full_order(plant: &GeneralizedPlant, opts: &FullOrderOptions) -> Result<FullOrderDesign> {
    if plant.p.domain().is_discrete() {
        return Err(Error::Synthesis("synthesis works on continuous plants".into()));
    }
    let parts = partition(&plant.p, plant.n_meas, plant.n_ctrl)?;
    let (parts, regularized) = regularize(parts, REGULARIZATION_EPS);
    let scaled = scale(&parts)?;

    let mut hi = 1.0;
    while central(&scaled, hi).is_none() {
        hi *= 2.0;
        if hi > MAX_GAMMA {
            return Err(Error::Synthesis(format!(
                "no feasible level below {MAX_GAMMA:e}: plant not stabilizable through u or not detectable through y"
            )));
        }
    }
    let mut lo = hi / 2.0;
    while lo > 1e-9 && central(&scaled, lo).is_some() {
        hi = lo;
        lo /= 2.0;
    }
    let tol = opts.gamma_tol.max(1e-9);
    while hi / lo > 1.0 + tol {
        let mid = (lo * hi).sqrt();
        if central(&scaled, mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let gamma_opt = hi;
    let mut gamma = hi * (1.0 + opts.backoff.max(0.0));
    let (ak, bk, ck, dk) = match central(&scaled, gamma) {
        Some(r) => r,
        None => {
            gamma = hi;
            central(&scaled, hi).ok_or_else(|| Error::Synthesis("controller construction failed at γ_opt".into()))?
        }
    };
    let k = StateSpaceSystem::new(ak, bk, ck, dk, Domain::Continuous)?;
    let cl = plant.close(&k)?;
    if !cl.is_stable() {
        return Err(Error::Synthesis(format!(
            "central controller does not stabilize (max pole real part {:.3e})",
            cl.stability_abscissa()
        )));
    }
    let closed_loop_norm = cl.hinf_norm(1e-6)?;
    Ok(FullOrderDesign {
        k,
        gamma,
        gamma_opt,
        closed_loop_norm,
        regularization: regularized.then_some(REGULARIZATION_EPS),
    })
}
