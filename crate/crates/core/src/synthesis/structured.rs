//! Fixed-structure synthesis by multi-start pattern search.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::controller::{Axis, ControllerSet};
use super::plant::{Channel, GeneralizedPlant};
use crate::error::{Error, Result};
use crate::linsys::{cascade_controller, sigma_max, FrequencyGrid, StateSpaceSystem};

const PARAM_BOUND: f64 = 12.0;
const FAR_CORNER: f64 = 1e3;

/// Orders of `(K_outer, K_inner)`; each block is static or first order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub outer: usize,
    pub inner: usize,
}

impl Structure {
    pub fn new(outer: usize, inner: usize) -> Result<Self> {
        if outer > 1 || inner > 1 {
            return Err(Error::InvalidParameter("block orders are limited to 0 or 1".into()));
        }
        Ok(Self { outer, inner })
    }

    fn n_params(self) -> usize {
        block_params(self.outer) + block_params(self.inner)
    }
}

impl std::str::FromStr for Structure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(',').ok_or_else(|| Error::Parse(format!("structure '{s}' must be 'outer,inner'")))?;
        let p = |t: &str| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad order '{t}'")));
        Structure::new(p(a)?, p(b)?)
    }
}

fn block_params(order: usize) -> usize {
    if order == 0 { 1 } else { 3 }
}

/// What the search minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Largest of the selected single-channel norms.
    ChannelMax,
    /// Norm of the complete `w → z` map, the quantity the full-order design minimizes.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredOptions {
    pub objective: Objective,
    pub starts: usize,
    pub seed: u64,
    pub channels: Vec<Channel>,
    /// Proportional gains `(K_outer, K_inner)` lifted into the first start.
    pub warm_start: Option<(f64, f64)>,
    pub max_evals_per_start: usize,
    pub axis: Axis,
    pub fs: f64,
}

impl Default for StructuredOptions {
    fn default() -> Self {
        Self {
            objective: Objective::ChannelMax,
            starts: 20,
            seed: 0,
            channels: Channel::ALL.to_vec(),
            warm_start: None,
            max_evals_per_start: 4000,
            axis: Axis::Roll,
            fs: 500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredDesign {
    pub set: ControllerSet,
    /// Largest exact channel norm over the optimized channels.
    pub gamma: f64,
    pub channel_norms: Vec<(Channel, f64)>,
    /// `gamma <= 1`: every weighted template is met.
    pub meets_templates: bool,
    pub best_start: usize,
    pub stabilizing_starts: usize,
}

/// Plant frequency response split into LFT blocks.
struct PlantSamples {
    omega: Vec<f64>,
    p11: Vec<DMatrix<Complex64>>,
    p12: Vec<DMatrix<Complex64>>,
    p21: Vec<DMatrix<Complex64>>,
    p22: Vec<DMatrix<Complex64>>,
}

impl PlantSamples {
    fn new(plant: &GeneralizedPlant, grid: &FrequencyGrid) -> Result<Self> {
        let (nz, nw) = (plant.n_exo_out, plant.n_exo_in);
        let mut s = PlantSamples { omega: Vec::new(), p11: Vec::new(), p12: Vec::new(), p21: Vec::new(), p22: Vec::new() };
        for &w in grid.points() {
            let g = plant.p.freq_response(w)?;
            s.omega.push(w);
            s.p11.push(g.view((0, 0), (nz, nw)).into_owned());
            s.p12.push(g.view((0, nw), (nz, plant.n_ctrl)).into_owned());
            s.p21.push(g.view((nz, 0), (plant.n_meas, nw)).into_owned());
            s.p22.push(g.view((nz, nw), (plant.n_meas, plant.n_ctrl)).into_owned());
        }
        Ok(s)
    }
}

/// Block `k(s + ωz)/(s + ωp)` (or `k`) from log-parameters `(ln k, ln ωz, ln ωp)`.
fn block_system(order: usize, th: &[f64]) -> StateSpaceSystem {
    let k = th[0].exp();
    if order == 0 {
        StateSpaceSystem::scalar_gain(k)
    } else {
        let (wz, wp) = (th[1].exp(), th[2].exp());
        StateSpaceSystem::from_tf(&[k, k * wz], &[1.0, wp]).expect("finite coefficients")
    }
}

fn block_response(order: usize, th: &[f64], w: f64) -> Complex64 {
    let k = th[0].exp();
    if order == 0 {
        Complex64::new(k, 0.0)
    } else {
        let s = Complex64::new(0.0, w);
        k * (s + th[1].exp()) / (s + th[2].exp())
    }
}

struct Problem<'a> {
    plant: &'a GeneralizedPlant,
    samples: PlantSamples,
    structure: Structure,
    channels: Vec<Channel>,
    objective: Objective,
}

impl Problem<'_> {
    fn split<'t>(&self, th: &'t [f64]) -> (&'t [f64], &'t [f64]) {
        th.split_at(block_params(self.structure.outer))
    }

    fn controller(&self, th: &[f64]) -> (StateSpaceSystem, StateSpaceSystem) {
        let (o, i) = self.split(th);
        (block_system(self.structure.outer, o), block_system(self.structure.inner, i))
    }

    fn is_stabilizing(&self, th: &[f64]) -> bool {
        let (ko, ki) = self.controller(th);
        match cascade_controller(&ko, &ki).and_then(|k| self.plant.close(&k)) {
            Ok(cl) => cl.is_stable(),
            Err(_) => false,
        }
    }

    /// Grid estimate of the largest channel norm; +∞ if destabilizing.
    fn objective(&self, th: &[f64]) -> f64 {
        if th.iter().any(|v| !v.is_finite() || v.abs() > PARAM_BOUND) || !self.is_stabilizing(th) {
            return f64::INFINITY;
        }
        let (o, i) = self.split(th);
        let mut worst: f64 = 0.0;
        for idx in 0..self.samples.omega.len() {
            let w = self.samples.omega[idx];
            let ki = block_response(self.structure.inner, i, w);
            let ko = block_response(self.structure.outer, o, w);
            let k = [ki * ko, -ki];
            let p22 = &self.samples.p22[idx];
            let kp22 = k[0] * p22[(0, 0)] + k[1] * p22[(1, 0)];
            let den = Complex64::new(1.0, 0.0) - kp22;
            if den.norm() < 1e-300 {
                return f64::INFINITY;
            }
            let p21 = &self.samples.p21[idx];
            if self.objective == Objective::Joint {
                let kp21 = p21.row(0) * k[0] + p21.row(1) * k[1];
                let t = &self.samples.p11[idx] + &self.samples.p12[idx] * kp21 / den;
                worst = worst.max(sigma_max(&t));
                continue;
            }
            for &ch in &self.channels {
                let (wi, zi) = ch.ports();
                let kp21 = k[0] * p21[(0, wi)] + k[1] * p21[(1, wi)];
                let t = self.samples.p11[idx][(zi, wi)] + self.samples.p12[idx][(zi, 0)] * kp21 / den;
                worst = worst.max(t.norm());
            }
        }
        worst
    }
}

fn clip(th: &mut [f64]) {
    for v in th.iter_mut() {
        *v = v.clamp(-PARAM_BOUND, PARAM_BOUND);
    }
}

/// Coordinate and random-direction pattern search from `x0`.
fn pattern_search(prob: &Problem, x0: Vec<f64>, rng: &mut ChaCha8Rng, budget: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = x0;
    let mut f = prob.objective(&x);
    let mut evals = 1;
    let mut step = 0.5;
    while step > 1e-6 && evals < budget && f.is_finite() {
        let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(4 * n);
        for i in 0..n {
            for sgn in [1.0, -1.0] {
                let mut d = vec![0.0; n];
                d[i] = sgn;
                dirs.push(d);
            }
        }
        // A freshly rotated orthonormal basis lets the poll follow ridges of the max.
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let q = g.qr().q();
        for j in 0..n {
            for sgn in [1.0, -1.0] {
                dirs.push(q.column(j).iter().map(|v| sgn * v).collect());
            }
        }
        let mut improved = false;
        for d in &dirs {
            let mut y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + step * b).collect();
            clip(&mut y);
            let fy = prob.objective(&y);
            evals += 1;
            if fy < f {
                x = y;
                f = fy;
                improved = true;
                // Keep moving while the direction pays off.
                let mut s = step;
                while evals < budget {
                    s *= 2.0;
                    let mut z: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + s * b).collect();
                    clip(&mut z);
                    let fz = prob.objective(&z);
                    evals += 1;
                    if fz < f {
                        x = z;
                        f = fz;
                    } else {
                        break;
                    }
                }
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, f)
}

fn warm_point(structure: Structure, gains: (f64, f64)) -> Vec<f64> {
    let lift = |order: usize, k: f64| -> Vec<f64> {
        if order == 0 { vec![k.ln()] } else { vec![k.ln(), FAR_CORNER.ln(), FAR_CORNER.ln()] }
    };
    let mut v = lift(structure.outer, gains.0);
    v.extend(lift(structure.inner, gains.1));
    v
}

fn random_point(structure: Structure, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let block = |order: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        let k = rng.random_range((1e-2f64).ln()..(1e3f64).ln());
        if order == 0 {
            vec![k]
        } else {
            let wz = rng.random_range((1e-1f64).ln()..(1e3f64).ln());
            let wp = rng.random_range((1e-1f64).ln()..(1e3f64).ln());
            vec![k, wz, wp]
        }
    };
    let mut v = block(structure.outer, rng);
    v.extend(block(structure.inner, rng));
    v
}

/// Exact per-channel norms of the closed loop under `k`.
pub fn channel_norms(plant: &GeneralizedPlant, k: &StateSpaceSystem, channels: &[Channel]) -> Result<Vec<(Channel, f64)>> {
    let cl = plant.close(k)?;
    if !cl.is_stable() {
        return Err(Error::Unstable { max_real: cl.stability_abscissa() });
    }
    channels
        .iter()
        .map(|&ch| Ok((ch, GeneralizedPlant::channel(&cl, ch)?.hinf_norm(1e-6)?)))
        .collect()
}

/// Multi-start search over cascaded low-order controllers.
pub fn synth_structured(plant: &GeneralizedPlant, structure: Structure, opts: &StructuredOptions) -> Result<StructuredDesign> {
    if opts.starts == 0 || opts.channels.is_empty() {
        return Err(Error::InvalidParameter("need at least one start and one channel".into()));
    }
    let grid = FrequencyGrid::log(1e-4, 1e4, 400)?;
    let prob = Problem {
        plant,
        samples: PlantSamples::new(plant, &grid)?,
        structure,
        channels: opts.channels.clone(),
        objective: opts.objective,
    };
    let runs: Vec<(Vec<f64>, f64)> = (0..opts.starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let x0 = match (i, opts.warm_start) {
                (0, Some(g)) => warm_point(structure, g),
                _ => random_point(structure, &mut rng),
            };
            debug_assert_eq!(x0.len(), structure.n_params());
            pattern_search(&prob, x0, &mut rng, opts.max_evals_per_start)
        })
        .collect();

    let stabilizing_starts = runs.iter().filter(|r| r.1.is_finite()).count();
    let (best_start, (best_x, best_f)) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .expect("starts > 0");
    if !best_f.is_finite() {
        return Err(Error::Synthesis(format!(
            "no stabilizing controller found in {} starts for structure ({}, {})",
            opts.starts, structure.outer, structure.inner
        )));
    }
    let (ko, ki) = prob.controller(best_x);
    let mut set = ControllerSet::new(opts.axis, ko, ki, opts.fs)?;
    let norms = channel_norms(plant, &set.combined()?, &Channel::ALL)?;
    let gamma = match opts.objective {
        Objective::ChannelMax => norms
            .iter()
            .filter(|(c, _)| opts.channels.contains(c))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max),
        Objective::Joint => plant.close(&set.combined()?)?.hinf_norm(1e-6)?,
    };
    set.gamma = Some(gamma);
    Ok(StructuredDesign {
        set,
        gamma,
        channel_norms: norms,
        meets_templates: gamma <= 1.0,
        best_start,
        stabilizing_starts,
    })
}
