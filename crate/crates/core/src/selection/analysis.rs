//! Interpretation of a fitted quadratic selection function: social norm, attraction
//! weights, aspiration levels and sociability.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::QuadraticSelection;
use crate::error::SelectionError;

/// `|θ2|` below this value leaves the social norm undefined.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Sampling covariance of (θ1, …, θ5). Entries that were not supplied are `NaN`;
/// operations fail only when they actually need such an entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaCovariance {
    entries: [[f64; 5]; 5],
}

impl ThetaCovariance {
    pub fn full(entries: [[f64; 5]; 5]) -> Self {
        Self { entries }
    }

    /// Diagonal covariance from standard errors; off-diagonal entries are taken as zero.
    pub fn from_std_errors(se: [f64; 5]) -> Self {
        let mut entries = [[0.0; 5]; 5];
        for k in 0..5 {
            entries[k][k] = se[k] * se[k];
        }
        Self { entries }
    }

    /// Nothing supplied yet.
    pub fn unknown() -> Self {
        Self {
            entries: [[f64::NAN; 5]; 5],
        }
    }

    /// Sets a symmetric pair of entries.
    pub fn set(&mut self, a: usize, b: usize, value: f64) {
        self.entries[a][b] = value;
        self.entries[b][a] = value;
    }

    pub fn get(&self, a: usize, b: usize) -> Result<f64, SelectionError> {
        let v = self.entries[a][b];
        if v.is_nan() {
            Err(SelectionError::MissingCovariance(a, b))
        } else {
            Ok(v)
        }
    }

    /// `c′ Σ c`, touching only the entries where `c` is nonzero.
    pub fn quadratic_form(&self, c: &[f64; 5]) -> Result<f64, SelectionError> {
        let mut acc = 0.0;
        for a in (0..5).filter(|&a| c[a] != 0.0) {
            for b in (0..5).filter(|&b| c[b] != 0.0) {
                acc += c[a] * c[b] * self.get(a, b)?;
            }
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub std_error: Option<f64>,
    pub in_range: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AspirationLevel {
    None,
    Weak,
    Medium,
    Strong,
}

impl AspirationLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Weak => "weak",
            Self::Medium => "medium",
            Self::Strong => "strong",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Definition {
    Strong,
    Medium,
    Weak,
}

/// One aspiration definition: the linear combination `c′θ` whose positivity is the
/// condition, with its one-sided test when a covariance is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AspirationTest {
    pub definition: Definition,
    pub coefficients: [f64; 5],
    pub value: f64,
    pub satisfied: bool,
    pub std_error: Option<f64>,
    pub z: Option<f64>,
    /// Right one-sided p-value under a standard normal reference.
    pub p_value: Option<f64>,
    pub significant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspirationVerdict {
    pub level: AspirationLevel,
    /// Ordered strong, medium, weak.
    pub tests: [AspirationTest; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SociabilityVerdict {
    /// `∂a/∂v_i ≥ 0` on the whole rectangle and not identically zero.
    pub strong: bool,
    /// `a^opt(v_i)` nondecreasing on the range with a net increase.
    pub weak: bool,
    /// Smallest value of `∂a/∂v_i` over the rectangle.
    pub min_ego_derivative: f64,
    /// Sampled `(v_i, a^opt(v_i))`.
    pub optimum_curve: Vec<(f64, f64)>,
}

/// A stretch of ego values on which the maximizing alter value is `offset + slope·v_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OptimumPiece {
    pub lo: f64,
    pub hi: f64,
    pub offset: f64,
    pub slope: f64,
}

fn std_normal() -> Normal {
    Normal::standard()
}

impl QuadraticSelection {
    /// `V^norm = −θ3 / (2θ2)` with an optional delta-method standard error.
    pub fn social_norm(
        &self,
        cov: Option<&ThetaCovariance>,
    ) -> Result<NormEstimate, SelectionError> {
        let (t2, t3) = (self.theta[1], self.theta[2]);
        if !(t2.abs() >= NORM_TOLERANCE) {
            return Err(SelectionError::NormUndefined { theta2: t2, theta3: t3 });
        }
        let value = -t3 / (2.0 * t2);
        let std_error = match cov {
            Some(cov) => {
                // gradient over (θ2, θ3)
                let grad = [0.0, t3 / (2.0 * t2 * t2), -1.0 / (2.0 * t2), 0.0, 0.0];
                Some(cov.quadratic_form(&grad)?.max(0.0).sqrt())
            }
            None => None,
        };
        Ok(NormEstimate {
            value,
            std_error,
            in_range: self.scale.contains(value),
        })
    }

    /// Weights of own value and of the social norm in the ideal point.
    pub fn attraction_weights(&self) -> Result<(f64, f64), SelectionError> {
        let (t1, t2) = (self.theta[0], self.theta[1]);
        let s = t1 + t2;
        if s == 0.0 {
            return Err(SelectionError::DegenerateWeights);
        }
        let homophily = t1 / s;
        Ok((homophily, 1.0 - homophily))
    }

    /// Linear combinations for the three aspiration definitions, strong to weak.
    pub fn aspiration_combinations(&self) -> [[f64; 5]; 3] {
        let s = &self.scale;
        // strong: ∂a/∂v_j ≥ 0 on the whole rectangle; the derivative is linear, so the
        // binding corner is where it is smallest ((V⁻, V⁺) when θ1, θ2 < 0)
        let mut strong = [0.0; 5];
        let mut best = f64::INFINITY;
        for v_ego in [s.min, s.max] {
            for v_alter in [s.max, s.min] {
                let d = self.d_alter(v_ego, v_alter);
                if d < best {
                    best = d;
                    strong = [2.0 * (v_alter - v_ego), 2.0 * v_alter, 1.0, 0.0, 0.0];
                }
            }
        }
        // medium: θ2 v² + θ3 v increasing on the range, binding at V⁺ when θ2 < 0, V⁻ when θ2 > 0
        let end = if self.theta[1] > 0.0 { s.min } else { s.max };
        let medium = [0.0, 2.0 * end, 1.0, 0.0, 0.0];
        let weak = [0.0, 2.0 * s.mean, 1.0, 0.0, 0.0];
        [strong, medium, weak]
    }

    /// Aspiration level from the point estimates, with one-sided tests of each
    /// defining combination when `cov` is given.
    pub fn classify_aspiration(
        &self,
        cov: Option<&ThetaCovariance>,
        alpha: f64,
    ) -> Result<AspirationVerdict, SelectionError> {
        let defs = [Definition::Strong, Definition::Medium, Definition::Weak];
        let combos = self.aspiration_combinations();
        let mut tests = Vec::with_capacity(3);
        for (definition, c) in defs.into_iter().zip(combos) {
            let value: f64 = c.iter().zip(&self.theta).map(|(a, b)| a * b).sum();
            let (std_error, z, p_value) = match cov.map(|cov| cov.quadratic_form(&c)).transpose()? {
                Some(var) if var > 0.0 => {
                    let se = var.sqrt();
                    let z = value / se;
                    (Some(se), Some(z), Some(std_normal().sf(z)))
                }
                _ => (None, None, None),
            };
            tests.push(AspirationTest {
                definition,
                coefficients: c,
                value,
                satisfied: value > 0.0,
                std_error,
                z,
                p_value,
                significant: p_value.map(|p| p < alpha),
            });
        }
        let level = if tests[0].satisfied {
            AspirationLevel::Strong
        } else if tests[1].satisfied {
            AspirationLevel::Medium
        } else if tests[2].satisfied {
            AspirationLevel::Weak
        } else {
            AspirationLevel::None
        };
        Ok(AspirationVerdict {
            level,
            tests: [tests[0], tests[1], tests[2]],
        })
    }

    /// Splits the ego range into pieces on which the maximizing alter value is affine
    /// in the ego value.
    pub(crate) fn optimum_pieces(&self) -> Vec<OptimumPiece> {
        let s = self.scale;
        let mut cuts = vec![s.min, s.max];
        let pick: Box<dyn Fn(f64) -> (f64, f64)>;
        if self.is_unimodal() {
            let [t1, t2, t3, _, _] = self.theta;
            let slope = t1 / (t1 + t2);
            let offset = -t3 / (2.0 * (t1 + t2));
            if slope != 0.0 {
                cuts.push((s.min - offset) / slope);
                cuts.push((s.max - offset) / slope);
            }
            pick = Box::new(move |v: f64| {
                let u = offset + slope * v;
                if u < s.min {
                    (s.min, 0.0)
                } else if u > s.max {
                    (s.max, 0.0)
                } else {
                    (offset, slope)
                }
            });
        } else {
            // max of the two endpoint curves; their difference is affine in the ego value
            let gap = |v: f64| self.evaluate(v, s.max) - self.evaluate(v, s.min);
            let (g0, g1) = (gap(s.min), gap(s.max));
            if g0 != g1 {
                cuts.push(s.min - g0 * (s.max - s.min) / (g1 - g0));
            }
            let this = *self;
            pick = Box::new(move |v: f64| {
                if this.evaluate(v, s.max) >= this.evaluate(v, s.min) {
                    (s.max, 0.0)
                } else {
                    (s.min, 0.0)
                }
            });
        }
        cuts.retain(|c| c.is_finite() && *c >= s.min && *c <= s.max);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let (offset, slope) = pick(0.5 * (w[0] + w[1]));
                OptimumPiece {
                    lo: w[0],
                    hi: w[1],
                    offset,
                    slope,
                }
            })
            .collect()
    }

    fn derivative_tolerance(&self) -> f64 {
        let mag = self.theta.iter().map(|t| t.abs()).sum::<f64>();
        let v = self.scale.min.abs().max(self.scale.max.abs());
        1e-12 * (1.0 + mag) * (1.0 + v) * (1.0 + v)
    }

    /// Strong and weak sociability, with `a^opt` sampled on `grid_size` ego values.
    pub fn classify_sociability(&self, grid_size: usize) -> SociabilityVerdict {
        let s = self.scale;
        let tol = self.derivative_tolerance();
        // ∂a/∂v_i is affine in (v_i, v_j): its extremes are at the corners
        let corners = [(s.min, s.min), (s.min, s.max), (s.max, s.min), (s.max, s.max)];
        let ds: Vec<f64> = corners.iter().map(|&(a, b)| self.d_ego(a, b)).collect();
        let min_d = ds.iter().copied().fold(f64::INFINITY, f64::min);
        let max_d = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let strong = min_d >= -tol && max_d > tol;

        // along a piece the total derivative d/dv a(w(v) | v) is affine in v, so checking
        // both ends of each piece is exact
        let nondecreasing = self.optimum_pieces().iter().all(|p| {
            [p.lo, p.hi].iter().all(|&v| {
                let w = p.offset + p.slope * v;
                self.d_ego(v, w) + p.slope * self.d_alter(v, w) >= -tol
            })
        });
        let rise = self.optimum_value(s.max) - self.optimum_value(s.min);
        let weak = nondecreasing && rise > tol;

        let optimum_curve = s
            .grid(grid_size.max(2))
            .into_iter()
            .map(|v| (v, self.optimum_value(v)))
            .collect();
        SociabilityVerdict {
            strong,
            weak,
            min_ego_derivative: min_d,
            optimum_curve,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{CovariateScale, QuadraticSelection};
    use super::*;

    fn grades() -> QuadraticSelection {
        QuadraticSelection::new(
            [-0.0288, -0.003, 0.044, -0.095, 0.026],
            CovariateScale::new(-6.0, 4.0, 0.0).unwrap(),
        )
        .unwrap()
    }

    fn age() -> QuadraticSelection {
        QuadraticSelection::new(
            [-0.0014, -0.0070, 0.039, 0.038, -0.0071],
            CovariateScale::new(-5.0, 11.0, 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn social_norm_values() {
        let n = age().social_norm(None).unwrap();
        assert!((n.value - 2.785714).abs() < 1e-5);
        assert!(n.in_range);
        let g = grades().social_norm(None).unwrap();
        assert!((g.value - 7.3333).abs() < 1e-3);
        assert!(!g.in_range);
    }

    #[test]
    fn social_norm_delta_method_by_hand() {
        let mut cov = ThetaCovariance::unknown();
        cov.set(1, 1, 0.0045f64.powi(2));
        cov.set(2, 2, 0.019f64.powi(2));
        cov.set(1, 2, 0.0);
        let n = age().social_norm(Some(&cov)).unwrap();
        let d = [0.039 / (2.0 * 0.007f64.powi(2)), 1.0 / (2.0 * 0.007)];
        assert!((d[0] - 397.959).abs() < 1e-3);
        assert!((d[1] - 71.4286).abs() < 1e-3);
        let se = n.std_error.unwrap();
        assert!((se - 2.247).abs() < 1e-3, "{se}");
    }

    #[test]
    fn social_norm_degenerate() {
        let s = CovariateScale::new(-1.0, 1.0, 0.0).unwrap();
        let q = QuadraticSelection::new([-1.0, 0.0, 0.5, 0.0, 0.0], s).unwrap();
        assert!(matches!(
            q.social_norm(None),
            Err(SelectionError::NormUndefined { .. })
        ));
        let q = QuadraticSelection::new([-1.0, 1e-12, 0.5, 0.0, 0.0], s).unwrap();
        assert!(q.social_norm(None).is_err());
    }

    #[test]
    fn missing_covariance_is_reported() {
        let cov = ThetaCovariance::unknown();
        assert_eq!(
            age().social_norm(Some(&cov)),
            Err(SelectionError::MissingCovariance(1, 1))
        );
        assert!(grades().classify_aspiration(Some(&cov), 0.05).is_err());
    }

    #[test]
    fn weights() {
        let (h, c) = grades().attraction_weights().unwrap();
        assert!((h - 0.906).abs() < 1e-3 && (c - 0.094).abs() < 1e-3);
        assert_eq!(h + c, 1.0);
        let s = CovariateScale::new(-1.0, 1.0, 0.0).unwrap();
        let eq = QuadraticSelection::new([-0.4, -0.4, 0.0, 0.0, 0.0], s).unwrap();
        assert_eq!(eq.attraction_weights().unwrap(), (0.5, 0.5));
        let pure = QuadraticSelection::new([-0.4, 0.0, 0.0, 0.0, 0.0], s).unwrap();
        assert_eq!(pure.attraction_weights().unwrap(), (1.0, 0.0));
        let degenerate = QuadraticSelection::new([-0.4, 0.4, 0.0, 0.0, 0.0], s).unwrap();
        assert_eq!(
            degenerate.attraction_weights(),
            Err(SelectionError::DegenerateWeights)
        );
    }

    #[test]
    fn aspiration_rows() {
        let g = grades().classify_aspiration(None, 0.05).unwrap();
        assert_eq!(g.level, AspirationLevel::Medium);
        assert!((g.tests[0].value - (-0.556)).abs() < 1e-12);
        assert!(!g.tests[0].satisfied);
        assert!((g.tests[1].value - 0.02).abs() < 1e-12);

        let a = age().classify_aspiration(None, 0.05).unwrap();
        assert_eq!(a.level, AspirationLevel::Weak);
        assert!((a.tests[2].value - 0.039).abs() < 1e-15);
    }

    #[test]
    fn aspiration_weak_test_for_age_alter() {
        // the weak combination on a centered covariate is θ3 alone
        let a = age()
            .classify_aspiration(
                Some(&ThetaCovariance::from_std_errors([0.0023, 0.0045, 0.019, 0.018, 0.0041])),
                0.05,
            )
            .unwrap();
        let weak = a.tests[2];
        assert!((weak.z.unwrap() - 0.039 / 0.019).abs() < 1e-12);
        assert!((weak.p_value.unwrap() - 0.0201).abs() < 5e-4);
        assert_eq!(weak.significant, Some(true));
    }

    #[test]
    fn medium_aspiration_for_convex_norm_term_uses_lower_end() {
        let s = CovariateScale::new(0.0, 2.0, 1.0).unwrap();
        // θ2 > 0 with the norm below V⁻: θ2 v² + θ3 v increasing over the range
        let q = QuadraticSelection::new([-1.0, 0.2, 0.1, 0.0, 0.0], s).unwrap();
        let c = q.aspiration_combinations()[1];
        assert_eq!(c, [0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(q.classify_aspiration(None, 0.05).unwrap().tests[1].satisfied, true);
    }

    #[test]
    fn zero_theta_has_no_verdicts() {
        let s = CovariateScale::new(-1.0, 1.0, 0.0).unwrap();
        let z = QuadraticSelection::new([0.0; 5], s).unwrap();
        assert_eq!(
            z.classify_aspiration(None, 0.05).unwrap().level,
            AspirationLevel::None
        );
        let soc = z.classify_sociability(11);
        assert!(!soc.strong && !soc.weak);
        assert!(soc.optimum_curve.iter().all(|&(_, a)| a == 0.0));
    }

    #[test]
    fn sociability_examples() {
        let s = CovariateScale::new(-2.0, 3.0, 0.0).unwrap();
        let q = QuadraticSelection::new([0.0, -0.1, 0.2, 5.0, 0.0], s).unwrap();
        let v = q.classify_sociability(21);
        assert!(v.strong && v.weak);
        assert_eq!(v.optimum_curve.len(), 21);

        let g = grades().classify_sociability(101);
        assert!(!g.weak);
        assert!(!g.strong);
        // decreasing over the lower half of the range
        let lower: Vec<f64> = g
            .optimum_curve
            .iter()
            .filter(|(v, _)| *v <= -1.0)
            .map(|p| p.1)
            .collect();
        assert!(lower.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn optimum_pieces_cover_range() {
        let q = grades();
        let pieces = q.optimum_pieces();
        assert_eq!(pieces.first().unwrap().lo, -6.0);
        assert_eq!(pieces.last().unwrap().hi, 4.0);
        for w in pieces.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
    }
}
