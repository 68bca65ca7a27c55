use nalgebra::DMatrix;

use super::system::{Domain, StateSpaceSystem};
use crate::error::{Error, Result};

/// Sign convention of a feedback loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackSign {
    Negative,
    Positive,
}

/// How a list of blocks is wired together by [`interconnect`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    /// `blocks[0]` feeds `blocks[1]` feeds ... ; the output is the last block's.
    Series,
    /// Shared input, summed outputs.
    Parallel,
    /// Block-diagonal stacking of inputs and outputs.
    Append,
    /// `blocks[0]` forward, `blocks[1]` in the return path.
    Feedback(FeedbackSign),
    /// Lower LFT of `blocks[0]` (plant) closed by `blocks[1]` (controller).
    /// The plant's last `n_meas` outputs feed the controller; the controller
    /// drives the plant's last `n_ctrl` inputs.
    LowerLft { n_meas: usize, n_ctrl: usize },
}

pub fn interconnect(blocks: &[StateSpaceSystem], topology: &Topology) -> Result<StateSpaceSystem> {
    let need = |k: usize| {
        if blocks.len() == k {
            Ok(())
        } else {
            Err(Error::Dimension(format!("topology needs {k} blocks, got {}", blocks.len())))
        }
    };
    match topology {
        Topology::Series | Topology::Parallel | Topology::Append => {
            let (first, rest) = blocks
                .split_first()
                .ok_or_else(|| Error::Dimension("no blocks to connect".into()))?;
            rest.iter().try_fold(first.clone(), |acc, b| match topology {
                Topology::Series => series(&acc, b),
                Topology::Parallel => parallel(&acc, b),
                _ => append(&acc, b),
            })
        }
        Topology::Feedback(sign) => {
            need(2)?;
            feedback(&blocks[0], &blocks[1], *sign)
        }
        Topology::LowerLft { n_meas, n_ctrl } => {
            need(2)?;
            lft_lower(&blocks[0], &blocks[1], *n_meas, *n_ctrl)
        }
    }
}

/// Common domain of two blocks; static gains adopt their partner's domain.
fn merge_domain(g: &StateSpaceSystem, h: &StateSpaceSystem) -> Result<Domain> {
    let dg = (g.order() > 0).then(|| g.domain());
    let dh = (h.order() > 0).then(|| h.domain());
    match (dg, dh) {
        (None, None) => Ok(if g.domain() == h.domain() { g.domain() } else { Domain::Continuous }),
        (Some(d), None) | (None, Some(d)) => Ok(d),
        (Some(a), Some(b)) if a == b => Ok(a),
        (Some(a), Some(b)) => Err(Error::Dimension(format!("cannot connect {a:?} with {b:?}"))),
    }
}

/// Block-diagonal composition: inputs `[u1; u2]`, outputs `[y1; y2]`.
pub fn append(g: &StateSpaceSystem, h: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    let domain = merge_domain(g, h)?;
    let a = block_diag(g.a(), h.a());
    let b = block_diag(g.b(), h.b());
    let c = block_diag(g.c(), h.c());
    let d = block_diag(g.d(), h.d());
    StateSpaceSystem::new(a, b, c, d, domain)
}

fn block_diag(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let (r1, c1) = x.shape();
    let (r2, c2) = y.shape();
    let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(x);
    m.view_mut((r1, c1), (r2, c2)).copy_from(y);
    m
}

/// Close internal connections of a system.
///
/// With inputs `u` and outputs `y`, impose `u = E r + F y` and report
/// `z = S y`. Fails if the direct-feedthrough loop `I - F D` is singular.
pub fn close_connections(
    sys: &StateSpaceSystem,
    e: &DMatrix<f64>,
    f: &DMatrix<f64>,
    s: &DMatrix<f64>,
) -> Result<StateSpaceSystem> {
    let (m, p) = (sys.n_inputs(), sys.n_outputs());
    if e.nrows() != m || f.shape() != (m, p) || s.ncols() != p {
        return Err(Error::Dimension("connection matrices do not match ports".into()));
    }
    let loop_m = DMatrix::identity(m, m) - f * sys.d();
    let lu = loop_m.clone().lu();
    let u = lu.u();
    let scale = loop_m.amax().max(1.0);
    let min_pivot = (0..m).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if m > 0 && !(min_pivot > scale * 1e-12) {
        return Err(Error::AlgebraicLoop(format!("I - F·D is singular (pivot {min_pivot:.3e})")));
    }
    let q = lu.try_inverse().ok_or_else(|| Error::AlgebraicLoop("I - F·D is singular".into()))?;
    let qe = &q * e;
    let qfc = &q * f * sys.c();
    let a = sys.a() + sys.b() * &qfc;
    let b = sys.b() * &qe;
    let c = s * (sys.c() + sys.d() * &qfc);
    let d = s * sys.d() * &qe;
    StateSpaceSystem::new(a, b, c, d, sys.domain())
}

fn zeros(r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::zeros(r, c)
}

fn eye(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

/// Stack `[x, y]` horizontally.
fn hcat(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(x.nrows(), x.ncols() + y.ncols());
    m.view_mut((0, 0), x.shape()).copy_from(x);
    m.view_mut((0, x.ncols()), y.shape()).copy_from(y);
    m
}

/// Stack `[x; y]` vertically.
fn vcat(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(x.nrows() + y.nrows(), x.ncols());
    m.view_mut((0, 0), x.shape()).copy_from(x);
    m.view_mut((x.nrows(), 0), y.shape()).copy_from(y);
    m
}

/// `h ∘ g`: the output of `g` drives `h`.
pub fn series(g: &StateSpaceSystem, h: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    let (mg, pg) = (g.n_inputs(), g.n_outputs());
    let (mh, ph) = (h.n_inputs(), h.n_outputs());
    if pg != mh {
        return Err(Error::Dimension(format!("series: {pg} outputs into {mh} inputs")));
    }
    let sys = append(g, h)?;
    let e = vcat(&eye(mg), &zeros(mh, mg));
    let f = vcat(&zeros(mg, pg + ph), &hcat(&eye(mh), &zeros(mh, ph)));
    let s = hcat(&zeros(ph, pg), &eye(ph));
    close_connections(&sys, &e, &f, &s)
}

/// `g + h` on a shared input.
pub fn parallel(g: &StateSpaceSystem, h: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    if g.n_inputs() != h.n_inputs() || g.n_outputs() != h.n_outputs() {
        return Err(Error::Dimension("parallel: port counts differ".into()));
    }
    let (m, p) = (g.n_inputs(), g.n_outputs());
    let sys = append(g, h)?;
    let e = vcat(&eye(m), &eye(m));
    let s = hcat(&eye(p), &eye(p));
    close_connections(&sys, &e, &zeros(2 * m, 2 * p), &s)
}

/// `[g, h]`: separate inputs, summed outputs.
pub fn hstack(g: &StateSpaceSystem, h: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    if g.n_outputs() != h.n_outputs() {
        return Err(Error::Dimension("hstack: output counts differ".into()));
    }
    let p = g.n_outputs();
    let sys = append(g, h)?;
    let m = sys.n_inputs();
    close_connections(&sys, &eye(m), &zeros(m, 2 * p), &hcat(&eye(p), &eye(p)))
}

/// `[g; h]`: shared input, stacked outputs.
pub fn vstack(g: &StateSpaceSystem, h: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    if g.n_inputs() != h.n_inputs() {
        return Err(Error::Dimension("vstack: input counts differ".into()));
    }
    let m = g.n_inputs();
    let sys = append(g, h)?;
    let p = sys.n_outputs();
    close_connections(&sys, &vcat(&eye(m), &eye(m)), &zeros(2 * m, p), &eye(p))
}

/// Loop with `g` forward and `h` in the return path; output is `g`'s.
pub fn feedback(g: &StateSpaceSystem, h: &StateSpaceSystem, sign: FeedbackSign) -> Result<StateSpaceSystem> {
    let (mg, pg) = (g.n_inputs(), g.n_outputs());
    let (mh, ph) = (h.n_inputs(), h.n_outputs());
    if mh != pg || ph != mg {
        return Err(Error::Dimension("feedback: loop ports do not match".into()));
    }
    let sgn = match sign {
        FeedbackSign::Negative => -1.0,
        FeedbackSign::Positive => 1.0,
    };
    let sys = append(g, h)?;
    let e = vcat(&eye(mg), &zeros(mh, mg));
    let f = vcat(&hcat(&zeros(mg, pg), &(eye(mg) * sgn)), &hcat(&eye(mh), &zeros(mh, ph)));
    let s = hcat(&eye(pg), &zeros(pg, ph));
    close_connections(&sys, &e, &f, &s)
}

/// Lower linear fractional transformation `F_l(P, K)`.
pub fn lft_lower(
    p: &StateSpaceSystem,
    k: &StateSpaceSystem,
    n_meas: usize,
    n_ctrl: usize,
) -> Result<StateSpaceSystem> {
    let (mp, pp) = (p.n_inputs(), p.n_outputs());
    if n_meas > pp || n_ctrl > mp || k.n_inputs() != n_meas || k.n_outputs() != n_ctrl {
        return Err(Error::Dimension("lft: controller ports do not match plant partition".into()));
    }
    let (nw, nz) = (mp - n_ctrl, pp - n_meas);
    let sys = append(p, k)?;
    // Inputs [w, u, uk], outputs [z, y, yk].
    let m_all = mp + n_meas;
    let p_all = pp + n_ctrl;
    let mut e = zeros(m_all, nw);
    e.view_mut((0, 0), (nw, nw)).copy_from(&eye(nw));
    let mut f = zeros(m_all, p_all);
    f.view_mut((nw, pp), (n_ctrl, n_ctrl)).copy_from(&eye(n_ctrl));
    f.view_mut((mp, nz), (n_meas, n_meas)).copy_from(&eye(n_meas));
    let mut s = zeros(nz, p_all);
    s.view_mut((0, 0), (nz, nz)).copy_from(&eye(nz));
    close_connections(&sys, &e, &f, &s)
}

/// Cascade `K = K_inner · [K_outer, -1]` acting on `(r - y, ẏ)`.
pub fn cascade_controller(k_outer: &StateSpaceSystem, k_inner: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    let minus = StateSpaceSystem::scalar_gain(-1.0);
    series(&hstack(k_outer, &minus)?, k_inner)
}
