//! Change scores of every effect for one actor, checked against recomputing the
//! evaluation function after each toggle.
//!
//! Run with `cargo run --example change_scores`.

use saom_quadratic::effects::{
    change_scores, evaluation_function, EffectKind, EffectSpec, ParameterVector,
};
use saom_quadratic::network::{ActorCovariate, Covariates, DirectedNetwork};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = DirectedNetwork::from_edges(
        6,
        &[(0, 1), (1, 0), (0, 2), (2, 3), (3, 0), (1, 2), (4, 0), (5, 4), (2, 1)],
    )?;
    let covs = Covariates::new().with(ActorCovariate::new(
        "grade",
        vec![6.5, 7.0, 8.0, 5.5, 9.0, 7.5],
        true,
        None,
    )?);

    let mut effects = vec![
        EffectSpec::structural(EffectKind::Outdegree)?,
        EffectSpec::structural(EffectKind::Reciprocity)?,
        EffectSpec::gwesp(EffectKind::Gwesp, std::f64::consts::LN_2)?,
    ];
    effects.extend(EffectSpec::quadratic("grade"));
    let beta = vec![-1.5, 1.2, 0.4, -0.03, -0.003, 0.044, -0.095, 0.026];
    let params = ParameterVector::new(effects, beta)?;

    let ego = 0;
    let scores = change_scores(&params, &net, &covs, ego)?;
    let base = evaluation_function(&params, &net, &covs, ego)?;
    println!("effects: {}", params.effects.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "));
    println!("{:>5} {:>6} {:>12} {:>12}", "alter", "tie", "change", "recomputed");
    for j in 0..net.n() {
        let recomputed = if j == ego {
            0.0
        } else {
            evaluation_function(&params, &net.toggle(ego, j)?, &covs, ego)? - base
        };
        println!("{j:>5} {:>6} {:>12.6} {recomputed:>12.6}", net.has_tie(ego, j), scores[j]);
    }
    Ok(())
}
