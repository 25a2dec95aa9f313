//! Interpretation report for a fitted quadratic selection function.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::estimation::MoMResult;
use crate::selection::{
    selection_table, AlterGrid, AspirationVerdict, CovariateScale, EgoAlterBasis,
    QuadraticSelection, SelectionTable, SociabilityVerdict, ThetaCovariance,
};

/// Effect short names of the quadratic model in parameter order.
pub const QUADRATIC_EFFECTS: [&str; 5] = ["diffSqX", "altSqX", "altX", "egoX", "egoSqX"];
/// The same surface with the ego-alter product in place of the squared ego term.
pub const EGO_ALTER_EFFECTS: [&str; 5] = ["diffSqX", "altSqX", "altX", "egoX", "egoXaltX"];

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionInput {
    pub covariate: String,
    pub theta: [f64; 5],
    pub covariance: Option<ThetaCovariance>,
    pub scale: CovariateScale,
}

impl SelectionInput {
    /// Picks the five quadratic parameters of `covariate` out of a fit, in either basis.
    pub fn from_fit(
        fit: &MoMResult,
        covariate: &str,
        scale: CovariateScale,
    ) -> Result<Self, ConfigError> {
        let find = |names: &[&str; 5]| -> Option<[usize; 5]> {
            let mut idx = [0; 5];
            for (k, n) in names.iter().enumerate() {
                idx[k] = fit.index_of(&format!("{n}({covariate})"))?;
            }
            Some(idx)
        };
        let (idx, ego_alter) = match (find(&QUADRATIC_EFFECTS), find(&EGO_ALTER_EFFECTS)) {
            (Some(i), _) => (i, false),
            (None, Some(i)) => (i, true),
            (None, None) => {
                return Err(ConfigError::Invalid(format!(
                    "fit lacks the quadratic effects on `{covariate}`; required: {}",
                    QUADRATIC_EFFECTS.map(|n| format!("{n}({covariate})")).join(", ")
                )))
            }
        };
        let raw: [f64; 5] = idx.map(|i| fit.theta[i]);
        let cov = DMatrix::from_fn(5, 5, |a, b| fit.covariance[idx[a]][idx[b]]);
        let (theta, cov) = if ego_alter {
            // θ = A φ
            let a = DMatrix::from_row_slice(
                5,
                5,
                &[
                    1.0, 0.0, 0.0, 0.0, -0.5, //
                    0.0, 1.0, 0.0, 0.0, 0.5, //
                    0.0, 0.0, 1.0, 0.0, 0.0, //
                    0.0, 0.0, 0.0, 1.0, 0.0, //
                    0.0, 0.0, 0.0, 0.0, 0.5,
                ],
            );
            let q = QuadraticSelection::from_ego_alter_basis(EgoAlterBasis(raw), scale)?;
            (q.theta, &a * cov * a.transpose())
        } else {
            (raw, cov)
        };
        let mut entries = [[0.0; 5]; 5];
        for (a, row) in entries.iter_mut().enumerate() {
            for (b, e) in row.iter_mut().enumerate() {
                *e = cov[(a, b)];
            }
        }
        Ok(Self {
            covariate: covariate.to_string(),
            theta,
            covariance: Some(ThetaCovariance::full(entries)),
            scale,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// `None` when `θ2 = 0` and the norm is undefined.
    pub value: Option<f64>,
    pub std_error: Option<f64>,
    pub in_range: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractionWeights {
    pub homophily: f64,
    pub conformity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub covariate: String,
    pub theta: [f64; 5],
    pub std_errors: Option<[f64; 5]>,
    pub scale: CovariateScale,
    pub unimodal: bool,
    pub social_norm: NormReport,
    pub attraction_weights: Option<AttractionWeights>,
    pub aspiration: AspirationVerdict,
    pub sociability: SociabilityVerdict,
    /// `(v_ego, location of the maximum over v_alter)`
    pub ideal_points: Vec<(f64, f64)>,
    pub table: SelectionTable,
}

pub fn analyze_selection(
    input: &SelectionInput,
    ego_values: &[f64],
    grid_resolution: usize,
    alpha: f64,
) -> Result<SelectionReport, ConfigError> {
    let q = QuadraticSelection::new(input.theta, input.scale)?;
    let cov = input.covariance.as_ref();
    let social_norm = match q.social_norm(cov) {
        Ok(n) => NormReport {
            value: Some(n.value),
            std_error: n.std_error,
            in_range: Some(n.in_range),
        },
        Err(_) => NormReport {
            value: None,
            std_error: None,
            in_range: None,
        },
    };
    let attraction_weights = q
        .attraction_weights()
        .ok()
        .map(|(homophily, conformity)| AttractionWeights {
            homophily,
            conformity,
        });
    let std_errors = cov.and_then(|c| {
        let mut se = [0.0; 5];
        for (k, s) in se.iter_mut().enumerate() {
            *s = c.get(k, k).ok()?.max(0.0).sqrt();
        }
        Some(se)
    });
    let grid = grid_resolution.max(2);
    Ok(SelectionReport {
        covariate: input.covariate.clone(),
        theta: input.theta,
        std_errors,
        scale: input.scale,
        unimodal: q.is_unimodal(),
        social_norm,
        attraction_weights,
        aspiration: q.classify_aspiration(cov, alpha)?,
        sociability: q.classify_sociability(grid),
        ideal_points: ego_values.iter().map(|&v| (v, q.argmax(v))).collect(),
        table: selection_table(&q, ego_values, &AlterGrid::Uniform(grid))?,
    })
}

impl SelectionReport {
    /// Plain-text interpretation, one numbered item per aspect.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let v = &self.covariate;
        let sc = &self.scale;
        let _ = writeln!(s, "Selection function for {v} on [{}, {}], mean {}", sc.min, sc.max, sc.mean);
        let names = ["diffSqX", "altSqX", "altX", "egoX", "egoSqX"];
        for (k, n) in names.iter().enumerate() {
            match self.std_errors {
                Some(se) => {
                    let _ = writeln!(s, "  {:<8} {:>10.4} ({:.4})", n, self.theta[k], se[k]);
                }
                None => {
                    let _ = writeln!(s, "  {:<8} {:>10.4}", n, self.theta[k]);
                }
            }
        }
        let _ = writeln!(s);
        match self.attraction_weights {
            Some(w) if self.unimodal => {
                let _ = writeln!(
                    s,
                    "1. Ideal point: weight {:.3} on own value (homophily), {:.3} on the social norm (conformity).",
                    w.homophily, w.conformity
                );
            }
            _ => {
                let _ = writeln!(
                    s,
                    "1. No interior ideal point: the function is not concave in the alter value."
                );
            }
        }
        match (self.social_norm.value, self.social_norm.in_range) {
            (Some(n), Some(inr)) => {
                let se = self
                    .social_norm
                    .std_error
                    .map_or(String::new(), |e| format!(" (s.e. {e:.3})"));
                let where_ = if inr { "inside" } else { "outside" };
                let _ = writeln!(s, "2. Social norm {n:.3}{se}, {where_} the covariate range.");
            }
            _ => {
                let _ = writeln!(s, "2. Social norm undefined (altSqX coefficient is zero).");
            }
        }
        let _ = writeln!(s, "3. Aspiration level: {}.", self.aspiration.level.as_str());
        for t in &self.aspiration.tests {
            let test = match (t.z, t.p_value) {
                (Some(z), Some(p)) => format!(", z = {z:.2}, one-sided p = {p:.4}"),
                _ => String::new(),
            };
            let _ = writeln!(
                s,
                "   {:<6} combination {:>9.4}{}",
                format!("{:?}", t.definition).to_lowercase(),
                t.value,
                test
            );
        }
        let yn = |b: bool| if b { "yes" } else { "no" };
        let _ = writeln!(
            s,
            "4. Sociability: strong {}, weak {}.",
            yn(self.sociability.strong),
            yn(self.sociability.weak)
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::AspirationLevel;

    fn input(theta: [f64; 5], lo: f64, hi: f64) -> SelectionInput {
        SelectionInput {
            covariate: "v".into(),
            theta,
            covariance: None,
            scale: CovariateScale::new(lo, hi, 0.0).unwrap(),
        }
    }

    #[test]
    fn grades_and_age_reports() {
        let g = analyze_selection(
            &input([-0.0288, -0.003, 0.044, -0.095, 0.026], -6.0, 4.0),
            &[-6.0, 0.0, 4.0],
            101,
            0.05,
        )
        .unwrap();
        assert!((g.attraction_weights.unwrap().homophily - 0.906).abs() < 1e-3);
        assert_eq!(g.social_norm.in_range, Some(false));
        assert_eq!(g.aspiration.level, AspirationLevel::Medium);
        assert!(!g.sociability.weak);
        let a = analyze_selection(
            &input([-0.0014, -0.0070, 0.039, 0.038, -0.0071], -5.0, 11.0),
            &[0.0],
            11,
            0.05,
        )
        .unwrap();
        assert!((a.social_norm.value.unwrap() - 2.786).abs() < 0.01);
        assert_eq!(a.aspiration.level, AspirationLevel::Weak);
        assert!(a.summary().contains("Aspiration level: weak"));
    }

    #[test]
    fn zero_theta_gives_none() {
        let r = analyze_selection(&input([0.0; 5], -1.0, 1.0), &[0.0], 5, 0.05).unwrap();
        assert_eq!(r.social_norm.value, None);
        assert_eq!(r.attraction_weights, None);
        assert_eq!(r.aspiration.level, AspirationLevel::None);
        assert!(!r.sociability.strong && !r.sociability.weak);
        assert!(r.table.rows.iter().all(|x| x.2 == 0.0));
        assert!(r.summary().contains("undefined"));
    }

    #[test]
    fn fit_extraction_in_both_bases() {
        use crate::effects::EffectSpec;
        let scale = CovariateScale::new(-2.0, 2.0, 0.0).unwrap();
        let theta = [-0.3, -0.1, 0.2, 0.05, 0.04];
        let q = QuadraticSelection::new(theta, scale).unwrap();
        let phi = q.to_ego_alter_basis().0;
        let mut effects = EffectSpec::quadratic("x");
        effects[4] = EffectSpec::covariate(crate::effects::EffectKind::CovEgoXAlter, "x").unwrap();
        let names: Vec<String> = effects.iter().map(|e| e.to_string()).collect();
        let ident: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..5).map(|j| if i == j { 0.01 } else { 0.0 }).collect())
            .collect();
        let fit = MoMResult {
            effects,
            parameter_names: names,
            n_rates: 0,
            theta: phi.to_vec(),
            covariance: ident.clone(),
            std_errors: vec![0.1; 5],
            targets: vec![0.0; 5],
            simulated_means: vec![0.0; 5],
            conv_t_ratios: vec![0.0; 5],
            max_conv_ratio: 0.0,
            n_phase3: 10,
            converged: true,
            restarts: 0,
            derivative: ident,
        };
        let inp = SelectionInput::from_fit(&fit, "x", scale).unwrap();
        for k in 0..5 {
            assert!((inp.theta[k] - theta[k]).abs() < 1e-12);
        }
        // Var(θ5) = Var(φ5)/4
        let c = inp.covariance.unwrap();
        assert!((c.get(4, 4).unwrap() - 0.0025).abs() < 1e-15);
        assert!((c.get(0, 4).unwrap() + 0.0025).abs() < 1e-15);
        let err = SelectionInput::from_fit(&fit, "y", scale).unwrap_err();
        assert!(err.to_string().contains("diffSqX(y)"));
    }
}
