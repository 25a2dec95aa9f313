//! Conventional covariate selection functions, kept for comparison with the quadratic family.

use serde::{Deserialize, Serialize};

use super::{CovariateScale, SelectionFunction};
use crate::error::SelectionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegacyFamily {
    /// `β1 |v_i − v_j|`
    AbsDifference,
    /// `β1 v_i + β2 v_j + β3 |v_i − v_j|`
    AbsDifferenceMain,
    /// `β1 v_i + β2 v_j + β3 v_i v_j`
    EgoAlterProduct,
    /// `β1 (v_j − v_i)²`
    PureQuadratic,
}

impl LegacyFamily {
    pub fn n_coefficients(&self) -> usize {
        match self {
            Self::AbsDifference | Self::PureQuadratic => 1,
            Self::AbsDifferenceMain | Self::EgoAlterProduct => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegacySelection {
    pub family: LegacyFamily,
    pub betas: Vec<f64>,
    pub scale: CovariateScale,
}

impl LegacySelection {
    pub fn new(
        family: LegacyFamily,
        betas: Vec<f64>,
        scale: CovariateScale,
    ) -> Result<Self, SelectionError> {
        if betas.len() != family.n_coefficients() {
            return Err(SelectionError::Invalid(format!(
                "{family:?} takes {} coefficients, got {}",
                family.n_coefficients(),
                betas.len()
            )));
        }
        if betas.iter().any(|b| !b.is_finite()) {
            return Err(SelectionError::Invalid("non-finite coefficient".into()));
        }
        Ok(Self { family, betas, scale })
    }
}

impl SelectionFunction for LegacySelection {
    fn evaluate(&self, vi: f64, vj: f64) -> f64 {
        let b = &self.betas;
        match self.family {
            LegacyFamily::AbsDifference => b[0] * (vi - vj).abs(),
            LegacyFamily::AbsDifferenceMain => b[0] * vi + b[1] * vj + b[2] * (vi - vj).abs(),
            LegacyFamily::EgoAlterProduct => b[0] * vi + b[1] * vj + b[2] * vi * vj,
            LegacyFamily::PureQuadratic => b[0] * (vj - vi) * (vj - vi),
        }
    }

    fn scale(&self) -> &CovariateScale {
        &self.scale
    }

    fn optimum_value(&self, vi: f64) -> f64 {
        // every family is linear, convex or concave in v_j with its only kink/vertex at
        // v_j = v_i, so the maximum sits at an endpoint or at the (clamped) ego value
        [self.scale.min, self.scale.max, self.scale.clamp(vi)]
            .into_iter()
            .map(|vj| self.evaluate(vi, vj))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scale() -> CovariateScale {
        CovariateScale::new(-6.0, 4.0, 0.0).unwrap()
    }

    #[test]
    fn coefficient_counts() {
        assert!(LegacySelection::new(LegacyFamily::AbsDifference, vec![1.0, 2.0], scale()).is_err());
        assert!(LegacySelection::new(LegacyFamily::EgoAlterProduct, vec![1.0, 2.0, 3.0], scale()).is_ok());
    }

    #[test]
    fn families_evaluate() {
        let s = scale();
        let a = LegacySelection::new(LegacyFamily::AbsDifference, vec![-0.5], s).unwrap();
        assert_eq!(a.evaluate(1.0, -1.0), -1.0);
        let m = LegacySelection::new(LegacyFamily::AbsDifferenceMain, vec![0.1, 0.2, -0.3], s).unwrap();
        assert!((m.evaluate(1.0, 3.0) - (0.1 + 0.6 - 0.6)).abs() < 1e-15);
        let p = LegacySelection::new(LegacyFamily::EgoAlterProduct, vec![0.1, 0.2, 0.3], s).unwrap();
        assert!((p.evaluate(2.0, -1.0) - (0.2 - 0.2 - 0.6)).abs() < 1e-15);
        let q = LegacySelection::new(LegacyFamily::PureQuadratic, vec![-1.0], s).unwrap();
        assert_eq!(q.evaluate(1.0, 3.0), -4.0);
    }

    #[test]
    fn optimum_matches_grid() {
        let s = scale();
        let fams = [
            (LegacyFamily::AbsDifference, vec![-0.5]),
            (LegacyFamily::AbsDifference, vec![0.5]),
            (LegacyFamily::AbsDifferenceMain, vec![0.1, 0.2, -0.3]),
            (LegacyFamily::AbsDifferenceMain, vec![0.1, -0.5, 0.3]),
            (LegacyFamily::EgoAlterProduct, vec![0.1, 0.2, 0.3]),
            (LegacyFamily::PureQuadratic, vec![-1.0]),
            (LegacyFamily::PureQuadratic, vec![1.0]),
        ];
        for (f, b) in fams {
            let sel = LegacySelection::new(f, b, s).unwrap();
            for vi in s.grid(11) {
                let brute = s
                    .grid(10_001)
                    .into_iter()
                    .map(|vj| sel.evaluate(vi, vj))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!((sel.optimum_value(vi) - brute).abs() < 1e-12, "{f:?} at {vi}");
            }
        }
    }
}
