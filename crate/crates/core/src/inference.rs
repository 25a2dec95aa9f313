//! Normal and chi-squared tests on estimated parameters.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::EstimationError;
use crate::estimation::MoMResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `z` for normal tests, `W` for Wald tests.
    pub statistic: f64,
    pub df: Option<usize>,
    pub side: Option<Side>,
    pub p_value: f64,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid normal")
}

/// p-value of a standard normal statistic.
pub fn normal_p_value(z: f64, side: Side) -> f64 {
    let n = std_normal();
    let p = match side {
        Side::Right => n.sf(z),
        Side::Left => n.cdf(z),
        Side::Two => 2.0 * n.sf(z.abs()),
    };
    p.clamp(0.0, 1.0)
}

/// Upper-tail p-value of a chi-squared statistic.
pub fn chi_squared_p_value(w: f64, df: usize) -> f64 {
    if w <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df as f64)
        .expect("df ≥ 1")
        .sf(w)
        .clamp(0.0, 1.0)
}

fn check_index(result: &MoMResult, index: usize) -> Result<(), EstimationError> {
    let len = result.theta.len();
    if index >= len {
        Err(EstimationError::IndexOutOfRange { index, len })
    } else {
        Ok(())
    }
}

/// Two-sided test of `θ_k = 0` with `z = θ_k / SE_k`.
pub fn t_test(result: &MoMResult, index: usize) -> Result<TestResult, EstimationError> {
    check_index(result, index)?;
    let se = result.std_errors[index];
    if !(se > 0.0) {
        return Err(EstimationError::ZeroStandardError(index));
    }
    let z = result.theta[index] / se;
    Ok(TestResult {
        statistic: z,
        df: None,
        side: Some(Side::Two),
        p_value: normal_p_value(z, Side::Two),
    })
}

/// Joint test of `θ_S = 0` with `W = θ_S' Σ_S⁻¹ θ_S ~ χ²_|S|`.
pub fn wald_test(result: &MoMResult, indices: &[usize]) -> Result<TestResult, EstimationError> {
    if indices.is_empty() {
        return Err(EstimationError::Invalid("Wald test needs at least one parameter".into()));
    }
    for &i in indices {
        check_index(result, i)?;
    }
    let s = indices.len();
    let cov = DMatrix::from_fn(s, s, |a, b| result.covariance[indices[a]][indices[b]]);
    let theta = DVector::from_iterator(s, indices.iter().map(|&i| result.theta[i]));
    let singular = || EstimationError::SingularCovariance {
        indices: indices.to_vec(),
    };
    let chol = cov.cholesky().ok_or_else(singular)?;
    let w = theta.dot(&chol.solve(&theta));
    if !w.is_finite() {
        return Err(singular());
    }
    Ok(TestResult {
        statistic: w,
        df: Some(s),
        side: None,
        p_value: chi_squared_p_value(w, s),
    })
}

/// Test of `c'θ = 0` with `z = c'θ / sqrt(c'Σc)`.
pub fn linear_combination_test(
    result: &MoMResult,
    c: &[f64],
    side: Side,
) -> Result<TestResult, EstimationError> {
    let p = result.theta.len();
    if c.len() != p {
        return Err(EstimationError::Invalid(format!(
            "{} coefficients for {p} parameters",
            c.len()
        )));
    }
    let cv = DVector::from_column_slice(c);
    let var = cv.dot(&(result.covariance_matrix() * &cv));
    if !(var > 0.0) {
        return Err(EstimationError::DegenerateVariance(var));
    }
    let est: f64 = c.iter().zip(&result.theta).map(|(a, b)| a * b).sum();
    let z = est / var.sqrt();
    Ok(TestResult {
        statistic: z,
        df: None,
        side: Some(side),
        p_value: normal_p_value(z, side),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(theta: Vec<f64>, cov: Vec<Vec<f64>>) -> MoMResult {
        let std_errors = (0..theta.len()).map(|k| cov[k][k].sqrt()).collect();
        MoMResult {
            effects: vec![],
            parameter_names: (0..theta.len()).map(|k| format!("p{k}")).collect(),
            n_rates: 0,
            conv_t_ratios: vec![0.0; theta.len()],
            targets: vec![0.0; theta.len()],
            simulated_means: vec![0.0; theta.len()],
            derivative: cov.clone(),
            theta,
            covariance: cov,
            std_errors,
            max_conv_ratio: 0.0,
            n_phase3: 1000,
            converged: true,
            restarts: 0,
        }
    }

    fn diag(v: &[f64]) -> Vec<Vec<f64>> {
        (0..v.len())
            .map(|i| (0..v.len()).map(|j| if i == j { v[i] } else { 0.0 }).collect())
            .collect()
    }

    #[test]
    fn t_test_examples() {
        let f = fit(vec![0.0, 1.96, -0.0288], diag(&[1.0, 1.0, 0.0073f64.powi(2)]));
        assert_eq!(t_test(&f, 0).unwrap().p_value, 1.0);
        assert!((t_test(&f, 1).unwrap().p_value - 0.05).abs() < 1e-3);
        let g = t_test(&f, 2).unwrap();
        assert!((g.statistic + 3.945).abs() < 1e-2 && g.p_value < 0.001);
        assert!(matches!(t_test(&f, 3), Err(EstimationError::IndexOutOfRange { .. })));
        let z = fit(vec![1.0], diag(&[0.0]));
        assert!(matches!(t_test(&z, 0), Err(EstimationError::ZeroStandardError(0))));
    }

    #[test]
    fn wald_examples() {
        let f = fit(vec![0.0, 0.0, 1.3], diag(&[1.0, 2.0, 0.25]));
        let w = wald_test(&f, &[0, 1]).unwrap();
        assert_eq!((w.statistic, w.p_value, w.df), (0.0, 1.0, Some(2)));
        let one = wald_test(&f, &[2]).unwrap();
        let t = t_test(&f, 2).unwrap();
        assert!((one.statistic - t.statistic.powi(2)).abs() < 1e-12);
        assert!((one.p_value - t.p_value).abs() < 1e-12);
        let sing = fit(vec![1.0, 1.0], vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(
            wald_test(&sing, &[0, 1]),
            Err(EstimationError::SingularCovariance { .. })
        ));
    }

    #[test]
    fn chi_squared_reference_value() {
        let p = chi_squared_p_value(23.3, 5);
        assert!((p - 0.0003).abs() < 5e-5, "{p}");
    }

    #[test]
    fn linear_combination_examples() {
        let f = fit(vec![0.5, 0.039, 0.2], diag(&[0.04, 0.019f64.powi(2), 1.0]));
        let unit = linear_combination_test(&f, &[1.0, 0.0, 0.0], Side::Two).unwrap();
        assert_eq!(unit, t_test(&f, 0).unwrap());
        let asp = linear_combination_test(&f, &[0.0, 1.0, 0.0], Side::Right).unwrap();
        assert!((asp.statistic - 2.0526).abs() < 1e-3);
        assert!((asp.p_value - 0.020).abs() < 1e-3);
        let left = linear_combination_test(&f, &[0.0, 1.0, 0.0], Side::Left).unwrap();
        assert!((left.p_value + asp.p_value - 1.0).abs() < 1e-12);
        let deg = fit(vec![1.0, 1.0], diag(&[1.0, 0.0]));
        assert!(matches!(
            linear_combination_test(&deg, &[0.0, 1.0], Side::Two),
            Err(EstimationError::DegenerateVariance(_))
        ));
    }
}
