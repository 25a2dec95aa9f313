//! Social selection functions of a numerical actor covariate.
//!
//! The quadratic family
//!
//! ```text
//! a(v_j | v_i) = θ1 (v_j − v_i)² + θ2 v_j² + θ3 v_j + θ4 v_i + θ5 v_i²
//! ```
//!
//! jointly represents homophily (θ1), attachment conformity toward a social norm
//! (θ2, θ3), aspiration, and sociability (θ4, θ5). With θ5 = 0 it is the
//! four-parameter model. The legacy specifications in [`legacy`] are kept as
//! comparison baselines.

mod analysis;
pub mod legacy;
mod table;

use serde::{Deserialize, Serialize};

use crate::error::SelectionError;
use crate::network::ActorCovariate;

pub use analysis::{
    AspirationLevel, AspirationTest, AspirationVerdict, Definition, NormEstimate,
    SociabilityVerdict, ThetaCovariance, NORM_TOLERANCE,
};
pub use legacy::{LegacyFamily, LegacySelection};
pub use table::{selection_table, AlterGrid, SelectionTable};

/// Range and mean of a covariate on its analysis scale: `V⁻`, `V⁺`, `V̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariateScale {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl CovariateScale {
    pub fn new(min: f64, max: f64, mean: f64) -> Result<Self, SelectionError> {
        if !(min.is_finite() && max.is_finite() && mean.is_finite()) || !(min < max) {
            return Err(SelectionError::Invalid(format!(
                "covariate range [{min}, {max}] must be finite and non-empty"
            )));
        }
        Ok(Self { min, max, mean })
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.min <= v && v <= self.max
    }

    /// `k` equally spaced points from `min` to `max` inclusive.
    pub fn grid(&self, k: usize) -> Vec<f64> {
        assert!(k >= 2, "grid needs at least two points");
        let step = (self.max - self.min) / (k - 1) as f64;
        (0..k)
            .map(|t| if t + 1 == k { self.max } else { self.min + step * t as f64 })
            .collect()
    }
}

impl From<&ActorCovariate> for CovariateScale {
    fn from(c: &ActorCovariate) -> Self {
        Self {
            min: c.range_min(),
            max: c.range_max(),
            mean: c.mean(),
        }
    }
}

/// Anything that maps an (ego, alter) covariate pair to a selection value.
pub trait SelectionFunction {
    fn evaluate(&self, v_ego: f64, v_alter: f64) -> f64;

    fn scale(&self) -> &CovariateScale;

    /// `max` over alter values in the covariate range.
    fn optimum_value(&self, v_ego: f64) -> f64;
}

/// Five-parameter quadratic selection function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSelection {
    /// (θ1, θ2, θ3, θ4, θ5) on the {diffSqX, altSqX, altX, egoX, egoSqX} basis.
    pub theta: [f64; 5],
    pub scale: CovariateScale,
}

/// Coefficients on the {diffSqX, altSqX, altX, egoX, egoXaltX} basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoAlterBasis(pub [f64; 5]);

impl QuadraticSelection {
    pub fn new(theta: [f64; 5], scale: CovariateScale) -> Result<Self, SelectionError> {
        if let Some(k) = theta.iter().position(|t| !t.is_finite()) {
            return Err(SelectionError::Invalid(format!("theta{} is not finite", k + 1)));
        }
        Ok(Self { theta, scale })
    }

    /// Four-parameter model: θ5 = 0.
    pub fn four_parameter(theta: [f64; 4], scale: CovariateScale) -> Result<Self, SelectionError> {
        Self::new([theta[0], theta[1], theta[2], theta[3], 0.0], scale)
    }

    pub fn from_ego_alter_basis(
        basis: EgoAlterBasis,
        scale: CovariateScale,
    ) -> Result<Self, SelectionError> {
        // v_i² = (v_j − v_i)² + 2 v_i v_j − v_j²
        let [p1, p2, p3, p4, p5] = basis.0;
        let t5 = p5 / 2.0;
        Self::new([p1 - t5, p2 + t5, p3, p4, t5], scale)
    }

    pub fn to_ego_alter_basis(&self) -> EgoAlterBasis {
        let [t1, t2, t3, t4, t5] = self.theta;
        EgoAlterBasis([t1 + t5, t2 - t5, t3, t4, 2.0 * t5])
    }

    #[inline]
    pub fn evaluate(&self, v_ego: f64, v_alter: f64) -> f64 {
        let [t1, t2, t3, t4, t5] = self.theta;
        let d = v_alter - v_ego;
        t1 * d * d + t2 * v_alter * v_alter + t3 * v_alter + t4 * v_ego + t5 * v_ego * v_ego
    }

    /// The norm-centred form `θ1 (v_j − v_i)² + θ2 (v_j + θ3/(2θ2))² + θ4 v_i + θ5 v_i²`,
    /// which differs from [`evaluate`](Self::evaluate) by the constant `θ3²/(4θ2)`.
    pub fn evaluate_norm_form(&self, v_ego: f64, v_alter: f64) -> Result<f64, SelectionError> {
        let [t1, t2, t3, t4, t5] = self.theta;
        if t2.abs() < NORM_TOLERANCE {
            return Err(SelectionError::NormUndefined { theta2: t2, theta3: t3 });
        }
        let d = v_alter - v_ego;
        let s = v_alter + t3 / (2.0 * t2);
        Ok(t1 * d * d + t2 * s * s + t4 * v_ego + t5 * v_ego * v_ego)
    }

    /// Partial derivative with respect to the alter value.
    #[inline]
    pub fn d_alter(&self, v_ego: f64, v_alter: f64) -> f64 {
        let [t1, t2, t3, _, _] = self.theta;
        2.0 * t1 * (v_alter - v_ego) + 2.0 * t2 * v_alter + t3
    }

    /// Partial derivative with respect to the ego value.
    #[inline]
    pub fn d_ego(&self, v_ego: f64, v_alter: f64) -> f64 {
        let [t1, _, _, t4, t5] = self.theta;
        2.0 * (t1 + t5) * v_ego - 2.0 * t1 * v_alter + t4
    }

    pub fn is_unimodal(&self) -> bool {
        self.theta[0] + self.theta[1] < 0.0
    }

    /// Unclamped ideal point `(θ1 v_i − θ3/2) / (θ1 + θ2)` for the unimodal case.
    fn ideal_point(&self, v_ego: f64) -> f64 {
        let [t1, t2, t3, _, _] = self.theta;
        (t1 * v_ego - t3 / 2.0) / (t1 + t2)
    }

    /// Location of the optimum over alter values, truncated to the covariate range.
    /// Returns the location and whether truncation occurred.
    pub fn optimum_location(&self, v_ego: f64) -> Result<(f64, bool), SelectionError> {
        if !self.is_unimodal() {
            return Err(SelectionError::NotUnimodal(self.theta[0] + self.theta[1]));
        }
        let raw = self.ideal_point(v_ego);
        let clamped = self.scale.clamp(raw);
        Ok((clamped, clamped != raw))
    }

    /// Maximizing endpoint when the function is convex or linear in the alter value.
    /// Ties go to `V⁺`.
    pub fn boundary_argmax(&self, v_ego: f64) -> f64 {
        let lo = self.evaluate(v_ego, self.scale.min);
        let hi = self.evaluate(v_ego, self.scale.max);
        if hi >= lo {
            self.scale.max
        } else {
            self.scale.min
        }
    }

    /// Location of the maximum over `[V⁻, V⁺]`, whatever the curvature.
    pub fn argmax(&self, v_ego: f64) -> f64 {
        match self.optimum_location(v_ego) {
            Ok((v, _)) => v,
            Err(_) => self.boundary_argmax(v_ego),
        }
    }

    /// `a^opt(v_i)`, computed by evaluating at the closed-form (truncated) argmax.
    pub fn optimum_value(&self, v_ego: f64) -> f64 {
        self.evaluate(v_ego, self.argmax(v_ego))
    }
}

impl SelectionFunction for QuadraticSelection {
    fn evaluate(&self, v_ego: f64, v_alter: f64) -> f64 {
        QuadraticSelection::evaluate(self, v_ego, v_alter)
    }

    fn scale(&self) -> &CovariateScale {
        &self.scale
    }

    fn optimum_value(&self, v_ego: f64) -> f64 {
        QuadraticSelection::optimum_value(self, v_ego)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn grades() -> QuadraticSelection {
        QuadraticSelection::new(
            [-0.0288, -0.003, 0.044, -0.095, 0.026],
            CovariateScale::new(-6.0, 4.0, 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let zero = QuadraticSelection::new([0.0; 5], CovariateScale::new(-1.0, 1.0, 0.0).unwrap())
            .unwrap();
        assert_eq!(zero.evaluate(0.3, -0.7), 0.0);

        assert!((grades().evaluate(0.0, 4.0) - (-0.3328)).abs() < 1e-12);

        let homo = QuadraticSelection::new(
            [-1.0, 0.0, 0.0, 0.0, 0.0],
            CovariateScale::new(-5.0, 5.0, 0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(homo.evaluate(1.5, 1.5), 0.0);
        assert!((homo.evaluate(1.5, 2.25) + 0.5625).abs() < 1e-15);
    }

    #[test]
    fn optimum_location_examples() {
        let s = CovariateScale::new(-6.0, 4.0, 0.0).unwrap();
        let homo = QuadraticSelection::new([-0.5, 0.0, 0.0, 0.3, 0.0], s).unwrap();
        assert_eq!(homo.optimum_location(1.25).unwrap(), (1.25, false));

        let conf = QuadraticSelection::new([0.0, -0.2, 0.4, 0.0, 0.0], s).unwrap();
        for v in [-6.0, -1.0, 3.0] {
            let (loc, clamped) = conf.optimum_location(v).unwrap();
            assert!((loc - 1.0).abs() < 1e-12);
            assert!(!clamped);
        }

        let (loc, clamped) = grades().optimum_location(0.0).unwrap();
        assert!((loc - 0.022 / 0.0318).abs() < 1e-12);
        assert!((loc - 0.6918).abs() < 1e-4);
        assert!(!clamped);

        let convex = QuadraticSelection::new([0.0, 1.0, 0.0, 0.0, 0.0], s).unwrap();
        assert!(matches!(
            convex.optimum_location(0.0),
            Err(SelectionError::NotUnimodal(_))
        ));
    }

    #[test]
    fn optimum_is_truncated_at_the_range() {
        let s = CovariateScale::new(-1.0, 1.0, 0.0).unwrap();
        let sel = QuadraticSelection::new([0.0, -1.0, 10.0, 0.0, 0.0], s).unwrap();
        assert_eq!(sel.optimum_location(0.0).unwrap(), (1.0, true));
    }

    #[test]
    fn boundary_argmax_examples() {
        let s = CovariateScale::new(-1.0, 1.0, 0.0).unwrap();
        let sym = QuadraticSelection::new([0.0, 1.0, 0.0, 0.0, 0.0], s).unwrap();
        assert_eq!(sym.boundary_argmax(0.0), 1.0);
        let lin = QuadraticSelection::new([0.0, 0.0, 1.0, 0.0, 0.0], s).unwrap();
        assert_eq!(lin.boundary_argmax(0.3), 1.0);
        let dec = QuadraticSelection::new([0.0, 0.0, -1.0, 0.0, 0.0], s).unwrap();
        assert_eq!(dec.boundary_argmax(0.3), -1.0);
    }

    #[test]
    fn optimum_value_examples() {
        let s = CovariateScale::new(-2.0, 2.0, 0.0).unwrap();
        let zero = QuadraticSelection::new([0.0; 5], s).unwrap();
        assert_eq!(zero.optimum_value(1.0), 0.0);
        let homo = QuadraticSelection::new([-1.0, 0.0, 0.0, 0.0, 0.0], s).unwrap();
        assert_eq!(homo.optimum_value(0.7), 0.0);
    }

    #[test]
    fn basis_round_trip() {
        let g = grades();
        let back = QuadraticSelection::from_ego_alter_basis(g.to_ego_alter_basis(), g.scale).unwrap();
        for (a, b) in g.theta.iter().zip(back.theta) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_endpoints_exact() {
        let s = CovariateScale::new(-6.0, 4.0, 0.0).unwrap();
        let g = s.grid(7);
        assert_eq!(g[0], -6.0);
        assert_eq!(g[6], 4.0);
    }
}
