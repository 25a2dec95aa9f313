//! Small dense linear-algebra helpers shared by estimation and goodness of fit.

use nalgebra::{DMatrix, DVector};

/// Relative eigenvalue cutoff below which a direction of a covariance matrix is treated as null.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-8;

/// Moore–Penrose pseudo-inverse of a symmetric positive semi-definite matrix.
pub fn pinv_symmetric(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut inv_vals = DVector::zeros(n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if top > 0.0 && l > PINV_RELATIVE_CUTOFF * top {
            inv_vals[k] = 1.0 / l;
        }
    }
    &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose()
}

/// Sample mean and covariance (divisor `r − 1`) of the rows of `rows`.
pub fn mean_covariance(rows: &[Vec<f64>]) -> (DVector<f64>, DMatrix<f64>) {
    let r = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    let mut mean = DVector::zeros(p);
    for row in rows {
        mean += DVector::from_column_slice(row);
    }
    if r > 0 {
        mean /= r as f64;
    }
    let mut cov = DMatrix::zeros(p, p);
    for row in rows {
        let d = DVector::from_column_slice(row) - &mean;
        cov += &d * d.transpose();
    }
    if r > 1 {
        cov /= (r - 1) as f64;
    }
    (mean, cov)
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, p, |i, j| rows[i][j])
}
