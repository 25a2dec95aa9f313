//! Simulates a three-wave panel under homophilous quadratic selection and writes it in
//! the adjacency and covariate formats that the model configuration reads.
//!
//! Run with `cargo run --release --example simulate_panel -- [out_dir]`.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saom_quadratic::effects::{EffectKind, EffectSpec, ParameterVector};
use saom_quadratic::io::{write_adjacency, write_covariate};
use saom_quadratic::network::{ActorCovariate, Covariates, DirectedNetwork};
use saom_quadratic::sim::{simulate_panel, RateParameters, SimOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "simulated_panel".into()));
    std::fs::create_dir_all(&out)?;
    let n = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grade: Vec<f64> = (0..n).map(|_| rng.random_range(4.0..=10.0f64).round()).collect();
    let covs = Covariates::new().with(ActorCovariate::new("grade", grade.clone(), true, Some((4.0, 10.0)))?);

    let mut effects = vec![
        EffectSpec::structural(EffectKind::Outdegree)?,
        EffectSpec::structural(EffectKind::Reciprocity)?,
        EffectSpec::structural(EffectKind::Gwesp)?,
    ];
    effects.extend(EffectSpec::quadratic("grade"));
    let params = ParameterVector::new(effects, vec![-1.2, 1.4, 0.3, -0.15, -0.02, 0.1, 0.0, 0.0])?;
    let rates = RateParameters::new(vec![6.0, 4.0])?;

    let start = DirectedNetwork::bernoulli(n, 0.1, &mut rng)?;
    let opts = SimOptions { seed: 12, ..SimOptions::default() };
    let panel = simulate_panel(&start, &params, &rates, &covs, 2, &opts)?;

    for (m, w) in panel.waves().iter().enumerate() {
        let same = w.edges().filter(|&(i, j)| grade[i] == grade[j]).count();
        println!(
            "wave {}: {:>3} ties, density {:.3}, {:>2} between equal grades",
            m + 1,
            w.tie_count(),
            w.density(),
            same
        );
        write_adjacency(&out.join(format!("wave{}.txt", m + 1)), w)?;
    }
    for (m, pair) in panel.waves().windows(2).enumerate() {
        println!("period {}: Hamming distance {}", m + 1, pair[0].hamming(&pair[1]));
    }
    write_covariate(&out.join("grade.csv"), panel.actor_labels(), &grade)?;
    println!("panel written to {}", out.display());
    Ok(())
}
