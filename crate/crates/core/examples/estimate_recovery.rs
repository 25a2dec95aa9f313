//! Simulates a two-wave panel from known parameters and re-estimates them.
//!
//! Run with `cargo run --release --example estimate_recovery -- [seed]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saom_quadratic::effects::{EffectKind, EffectSpec, ParameterVector};
use saom_quadratic::estimation::{estimate, MomOptions};
use saom_quadratic::inference::t_test;
use saom_quadratic::network::{ActorCovariate, Covariates, DirectedNetwork, NetworkPanel};
use saom_quadratic::sim::{substream, Simulator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(7), |s| s.parse())?;
    let n = 30;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..=3.0)).collect();
    let covs = Covariates::new().with(ActorCovariate::new("v", raw, false, Some((-3.0, 3.0)))?);

    let effects = vec![
        EffectSpec::structural(EffectKind::Outdegree)?,
        EffectSpec::structural(EffectKind::Reciprocity)?,
        EffectSpec::covariate(EffectKind::CovDiffSq, "v")?,
        EffectSpec::covariate(EffectKind::CovAlter, "v")?,
        EffectSpec::covariate(EffectKind::CovEgo, "v")?,
    ];
    let truth = ParameterVector::new(effects.clone(), vec![-2.0, 1.5, -0.05, 0.2, -0.1])?;
    let rate = 5.0;

    // the first wave is a Bernoulli digraph; the second is simulated one period later
    let first = DirectedNetwork::bernoulli(n, 0.15, &mut rng)?;
    let sim = Simulator::new(&truth, &covs, n)?;
    let mut srng = substream(seed, 0);
    let second = sim.run_period(&first, rate, 1.0, 1_000_000, &mut srng).end;
    let panel = NetworkPanel::with_default_labels(vec![first, second], covs.clone())?;

    let fit = estimate(&panel, &effects, &MomOptions { seed, ..MomOptions::default() })?;
    let true_theta: Vec<f64> = std::iter::once(rate).chain(truth.beta.iter().copied()).collect();
    println!("{:<14} {:>9} {:>9} {:>8} {:>8}", "parameter", "truth", "estimate", "s.e.", "p");
    for (k, name) in fit.parameter_names.iter().enumerate() {
        let p = t_test(&fit, k).map(|t| t.p_value).unwrap_or(f64::NAN);
        println!(
            "{name:<14} {:>9.4} {:>9.4} {:>8.4} {p:>8.4}",
            true_theta[k], fit.theta[k], fit.std_errors[k]
        );
    }
    println!(
        "converged: {} (restarts {}), max |t| {:.3}, overall ratio {:.3}",
        fit.converged,
        fit.restarts,
        fit.conv_t_ratios.iter().fold(0.0f64, |a, t| a.max(t.abs())),
        fit.max_conv_ratio
    );
    Ok(())
}
