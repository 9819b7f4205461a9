//! Small dense-matrix helpers for covariance handling.

use crate::error::{Error, Result};

/// Row-major square matrix stored as nested rows.
pub type Matrix = Vec<Vec<f64>>;

fn check_symmetric(a: &Matrix, tol: f64) -> Result<usize> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::shape("covariance", "matrix is not square"));
    }
    for i in 0..n {
        for j in 0..i {
            if (a[i][j] - a[j][i]).abs() > tol * (1.0 + a[i][j].abs()) {
                return Err(Error::Contract(format!("covariance not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(n)
}

/// Lower Cholesky factor of a symmetric positive semi-definite matrix.
///
/// Zero pivots are allowed as long as the rest of their column vanishes,
/// which admits degenerate (point-mass) covariances.
pub fn cholesky_psd(a: &Matrix) -> Result<Matrix> {
    const TOL: f64 = 1e-12;
    let n = check_symmetric(a, 1e-10)?;
    let scale = (0..n).map(|i| a[i][i].abs()).fold(1.0f64, f64::max);
    let tol = TOL * scale;
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let d = a[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if d < -tol {
            return Err(Error::Contract(format!("covariance is not positive semi-definite (pivot {d})")));
        }
        if d <= tol {
            for i in j + 1..n {
                let r = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
                if r.abs() > tol.sqrt() {
                    return Err(Error::Contract("covariance is not positive semi-definite".into()));
                }
            }
            continue;
        }
        let ljj = d.sqrt();
        l[j][j] = ljj;
        for i in j + 1..n {
            let r = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = r / ljj;
        }
    }
    Ok(l)
}

/// Strict Cholesky factor; fails on singular or indefinite input.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let l = cholesky_psd(a)?;
    if l.iter().enumerate().any(|(i, r)| r[i] <= 0.0) {
        return Err(Error::Contract("covariance is singular".into()));
    }
    Ok(l)
}

/// Inverse and log-determinant of a symmetric positive-definite matrix.
pub fn spd_inverse_logdet(a: &Matrix) -> Result<(Matrix, f64)> {
    let l = cholesky(a)?;
    let n = l.len();
    let logdet = 2.0 * (0..n).map(|i| l[i][i].ln()).sum::<f64>();
    // Invert L by forward substitution, then A⁻¹ = L⁻ᵀ L⁻¹.
    let mut linv = vec![vec![0.0; n]; n];
    for i in 0..n {
        linv[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let s: f64 = (j..i).map(|k| l[i][k] * linv[k][j]).sum();
            linv[i][j] = -s / l[i][i];
        }
    }
    let mut inv = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            inv[i][j] = (i.max(j)..n).map(|k| linv[k][i] * linv[k][j]).sum();
        }
    }
    Ok((inv, logdet))
}

/// `xᵀ A x`.
pub fn quad_form(a: &Matrix, x: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            s += x[i] * v * x[j];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_2x2() {
        let a = vec![vec![2.0, 0.5], vec![0.5, 1.0]];
        let (inv, logdet) = spd_inverse_logdet(&a).unwrap();
        let det: f64 = 2.0 * 1.0 - 0.25;
        assert!((logdet - det.ln()).abs() < 1e-12);
        assert!((inv[0][0] - 1.0 / det).abs() < 1e-12);
        assert!((inv[0][1] + 0.5 / det).abs() < 1e-12);
        assert!((inv[1][1] - 2.0 / det).abs() < 1e-12);
    }

    #[test]
    fn psd_accepts_degenerate_rejects_indefinite() {
        assert!(cholesky_psd(&vec![vec![0.0]]).is_ok());
        assert!(cholesky_psd(&vec![vec![1.0, 1.0], vec![1.0, 1.0]]).is_ok());
        assert!(cholesky_psd(&vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(cholesky_psd(&vec![vec![-1.0]]).is_err());
        assert!(cholesky(&vec![vec![1.0, 1.0], vec![1.0, 1.0]]).is_err());
    }
}
