//! Stabilizing Riccati solutions through the matrix sign function.

use nalgebra::DMatrix;

use crate::linsys::eigenvalues;

const MAX_ITER: usize = 100;

/// Matrix sign function by the scaled Newton iteration.
fn matrix_sign(h: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = h.nrows();
    let mut z = h.clone();
    for _ in 0..MAX_ITER {
        let lu = z.clone().lu();
        let u = lu.u();
        let mut log_det = 0.0;
        for i in 0..n {
            let p = u[(i, i)].abs();
            if !(p > 0.0) || !p.is_finite() {
                return None;
            }
            log_det += p.ln();
        }
        let zi = lu.try_inverse()?;
        let c = (log_det / n as f64).exp();
        let next = (&z / c + zi * c) * 0.5;
        let delta = (&next - &z).abs().row_sum().amax();
        let size = next.abs().row_sum().amax();
        z = next;
        if !z.iter().all(|v| v.is_finite()) {
            return None;
        }
        if delta <= 1e-13 * size {
            return Some(z);
        }
    }
    let resid = (&z * &z - DMatrix::identity(n, n)).amax();
    (resid < 1e-8).then_some(z)
}

/// Solution `X` of the Riccati equation whose Hamiltonian is `h`.
///
/// Returns `None` when `h` has eigenvalues on (or numerically near) the
/// imaginary axis, or the stable invariant subspace is not a graph `[I; X]`.
pub fn solve_from_hamiltonian(h: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n2 = h.nrows();
    if n2 % 2 != 0 || h.ncols() != n2 {
        return None;
    }
    let n = n2 / 2;
    let scale = h.amax().max(1e-300);
    let ev = eigenvalues(h);
    if ev.iter().any(|l| l.re.abs() <= 1e-10 * l.norm().max(1e-8 * scale)) {
        return None;
    }
    let s = matrix_sign(h)?;
    let w11 = s.view((0, 0), (n, n));
    let w12 = s.view((0, n), (n, n));
    let w21 = s.view((n, 0), (n, n));
    let w22 = s.view((n, n), (n, n));
    let i = DMatrix::<f64>::identity(n, n);
    let mut lhs = DMatrix::zeros(n2, n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&w12);
    lhs.view_mut((n, 0), (n, n)).copy_from(&(w22 + &i));
    let mut rhs = DMatrix::zeros(n2, n);
    rhs.view_mut((0, 0), (n, n)).copy_from(&(-(w11 + &i)));
    rhs.view_mut((n, 0), (n, n)).copy_from(&(-w21));
    let svd = lhs.svd(true, true);
    let smax = svd.singular_values.amax();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return None;
    }
    let x = svd.solve(&rhs, 0.0).ok()?;
    let x = (&x + x.transpose()) * 0.5;

    // The closed-loop block must be Hurwitz for the stabilizing solution.
    let h11 = h.view((0, 0), (n, n)).into_owned();
    let h12 = h.view((0, n), (n, n)).into_owned();
    let acl = h11 + h12 * &x;
    if eigenvalues(&acl).iter().any(|l| l.re >= 0.0) {
        return None;
    }
    Some(x)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_sym_eigenvalue(x: &DMatrix<f64>) -> f64 {
    if x.nrows() == 0 {
        return 0.0;
    }
    x.clone().symmetric_eigen().eigenvalues.min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_care() {
        // A = -1, B = 1, Q = 1, R = 1: X solves -2X - X^2 + 1 = 0 -> X = sqrt(2) - 1.
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, -1.0, -1.0, 1.0]);
        let x = solve_from_hamiltonian(&h).unwrap();
        assert!((x[(0, 0)] - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn lqr_double_integrator() {
        // A = [[0,1],[0,0]], B = [0;1], Q = I, R = 1.
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let q = DMatrix::<f64>::identity(2, 2);
        let mut h = DMatrix::zeros(4, 4);
        h.view_mut((0, 0), (2, 2)).copy_from(&a);
        h.view_mut((0, 2), (2, 2)).copy_from(&(-(&b * b.transpose())));
        h.view_mut((2, 0), (2, 2)).copy_from(&(-&q));
        h.view_mut((2, 2), (2, 2)).copy_from(&(-a.transpose()));
        let x = solve_from_hamiltonian(&h).unwrap();
        let res = a.transpose() * &x + &x * &a - &x * &b * b.transpose() * &x + q;
        assert!(res.amax() < 1e-10);
        assert!(min_sym_eigenvalue(&x) > 0.0);
    }

    #[test]
    fn imaginary_axis_eigenvalues_rejected() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(solve_from_hamiltonian(&h).is_none());
    }
}
