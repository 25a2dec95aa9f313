//! Interprets two fitted quadratic selection functions: school grades and age.
//!
//! Run with `cargo run --example selection_analysis`.

use saom_quadratic::inference::{normal_p_value, Side};
use saom_quadratic::report::{analyze_selection, SelectionInput};
use saom_quadratic::selection::{CovariateScale, QuadraticSelection, ThetaCovariance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // grades on the centered scale [-6, 4], age on [-5, 11]; point estimates only
    let grades = SelectionInput {
        covariate: "grades".into(),
        theta: [-0.0288, -0.003, 0.044, -0.095, 0.026],
        covariance: None,
        scale: CovariateScale::new(-6.0, 4.0, 0.0)?,
    };
    let age = SelectionInput {
        covariate: "age".into(),
        theta: [-0.0014, -0.0070, 0.039, 0.038, -0.0071],
        covariance: None,
        scale: CovariateScale::new(-5.0, 11.0, 0.0)?,
    };

    for input in [&grades, &age] {
        let lo = input.scale.min;
        let hi = input.scale.max;
        let report = analyze_selection(input, &[lo, 0.0, hi], 101, 0.05)?;
        println!("{}", report.summary());
        for (ego, best) in &report.ideal_points {
            println!("   ego {ego:>5.1}: most attractive alter value {best:.3}");
        }
        println!();
    }

    // only the altSqX and altX standard errors of the age row are known; they suffice
    // for the norm's standard error and the weak-aspiration test
    let mut cov = ThetaCovariance::unknown();
    cov.set(1, 1, 0.0045f64.powi(2));
    cov.set(2, 2, 0.019f64.powi(2));
    cov.set(1, 2, 0.0);
    let q = QuadraticSelection::new(age.theta, age.scale)?;
    let norm = q.social_norm(Some(&cov))?;
    println!("age social norm {:.3} (s.e. {:.3})", norm.value, norm.std_error.unwrap_or(f64::NAN));
    let weak = q.aspiration_combinations()[2];
    let value: f64 = weak.iter().zip(&q.theta).map(|(c, t)| c * t).sum();
    let z = value / cov.quadratic_form(&weak)?.sqrt();
    println!("age weak aspiration: z = {z:.2}, one-sided p = {:.4}", normal_p_value(z, Side::Right));
    Ok(())
}
