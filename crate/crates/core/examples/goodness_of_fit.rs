//! Fits a model without reciprocity to reciprocal data and compares auxiliary statistics
//! of simulated and observed networks.
//!
//! Run with `cargo run --release --example goodness_of_fit`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use saom_quadratic::effects::{EffectKind, EffectSpec, ParameterVector};
use saom_quadratic::estimation::{estimate, MomOptions};
use saom_quadratic::gof::{gof_families, GofFamily};
use saom_quadratic::network::{Covariates, DirectedNetwork, NetworkPanel};
use saom_quadratic::sim::{substream, Simulator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 30;
    let covs = Covariates::new();
    let truth = ParameterVector::new(
        vec![
            EffectSpec::structural(EffectKind::Outdegree)?,
            EffectSpec::structural(EffectKind::Reciprocity)?,
        ],
        vec![-2.0, 2.0],
    )?;
    let first = DirectedNetwork::bernoulli(n, 0.15, &mut ChaCha8Rng::seed_from_u64(1))?;
    let second = Simulator::new(&truth, &covs, n)?
        .run_period(&first, 5.0, 1.0, 1_000_000, &mut substream(2, 0))
        .end;
    let panel = NetworkPanel::with_default_labels(vec![first, second], covs)?;

    let opts = MomOptions { seed: 3, phase3_runs: 500, ..MomOptions::default() };
    for effects in [truth.effects[..1].to_vec(), truth.effects.clone()] {
        let names: Vec<String> = effects.iter().map(|e| e.to_string()).collect();
        let fit = estimate(&panel, &effects, &opts)?;
        println!("model: {}", names.join(" + "));
        for r in gof_families(&panel, &fit, &GofFamily::ALL, 200, 4)? {
            print!("  {:<22} distance {:>7.2}  p = {:.3}", r.family.name(), r.mahalanobis_observed, r.p_value);
            if let Some((obs, sim)) = r.transitive {
                print!("  transitive triads {obs} observed, {sim:.1} simulated");
            }
            println!();
        }
    }
    Ok(())
}
