use nalgebra::DMatrix;

/// Moore–Penrose pseudo-inverse via SVD.
///
/// Singular values below `max(rows, cols) · σ_max · 2⁻⁴⁰` are treated as zero.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let s_max = svd.singular_values.iter().fold(0.0f64, |a, v| a.max(*v));
    let cutoff = r.max(c) as f64 * s_max * 2f64.powi(-40);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut out = DMatrix::zeros(c, r);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            out += v_t.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    out
}

/// Ratio of largest to smallest retained singular value (∞ if rank-deficient).
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let s_max = sv.iter().fold(0.0f64, |a, v| a.max(*v));
    let s_min = sv.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    let cutoff = r.max(c) as f64 * s_max * 2f64.powi(-40);
    if s_min <= cutoff { f64::INFINITY } else { s_max / s_min }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_own_inverse() {
        let i = DMatrix::<f64>::identity(4, 4);
        assert!((pseudo_inverse(&i) - &i).amax() < 1e-15);
    }

    #[test]
    fn invertible_matches_inverse() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.0, 2.0, 5.0]);
        let inv = m.clone().try_inverse().unwrap();
        assert!((pseudo_inverse(&m) - inv).amax() < 1e-10);
    }

    #[test]
    fn rank_deficient_penrose() {
        let a = DMatrix::from_row_slice(4, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 2.0, 0.0, 1.0, 0.0, 1.0, -2.0]);
        let b = DMatrix::from_row_slice(3, 4, &[1.0, 0.0, 2.0, -1.0, 0.0, 1.0, 1.0, 3.0, 2.0, -1.0, 0.0, 1.0]);
        let m = a * b;
        let p = pseudo_inverse(&m);
        assert!((&m * &p * &m - &m).amax() < 1e-8);
        assert!(condition_number(&m).is_infinite());
    }
}
