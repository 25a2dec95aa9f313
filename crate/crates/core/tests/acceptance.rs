//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use saom_quadratic::effects::{
    change_scores, evaluation_function, gwesp_contribution, EffectKind, EffectSpec,
    ParameterVector,
};
use saom_quadratic::estimation::{estimate, MoMResult, MomOptions};
use saom_quadratic::gof::{gof_families, GofFamily};
use saom_quadratic::network::{ActorCovariate, Covariates, DirectedNetwork, NetworkPanel};
use saom_quadratic::selection::{
    AspirationLevel, CovariateScale, EgoAlterBasis, QuadraticSelection,
    ThetaCovariance,
};
use saom_quadratic::sim::{substream, Simulator};

type Outcome = Result<String, String>;

fn grades() -> QuadraticSelection {
    let s = CovariateScale::new(-6.0, 4.0, 0.0).unwrap();
    QuadraticSelection::new([-0.0288, -0.003, 0.044, -0.095, 0.026], s).unwrap()
}

fn age() -> QuadraticSelection {
    let s = CovariateScale::new(-5.0, 11.0, 0.0).unwrap();
    QuadraticSelection::new([-0.0014, -0.0070, 0.039, 0.038, -0.0071], s).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_scale(rng: &mut ChaCha8Rng) -> CovariateScale {
    let lo = rng.random_range(-6.0..0.0);
    let hi = lo + rng.random_range(0.5..12.0);
    let mean = rng.random_range(lo..hi);
    CovariateScale::new(lo, hi, mean).unwrap()
}

fn random_theta(rng: &mut ChaCha8Rng) -> [f64; 5] {
    std::array::from_fn(|_| rng.random_range(-1.0..1.0))
}

fn social_norm() -> Outcome {
    let a = age().social_norm(None).map_err(|e| e.to_string())?;
    let g = grades().social_norm(None).map_err(|e| e.to_string())?;
    check(
        (a.value - 2.786).abs() <= 0.01 && (g.value - 7.33).abs() <= 0.01 && !g.in_range,
        format!("age {:.4}, grades {:.4} (in range: {})", a.value, g.value, g.in_range),
    )
}

fn attraction_weights() -> Outcome {
    let (h, c) = grades().attraction_weights().map_err(|e| e.to_string())?;
    check(
        (h - 0.906).abs() <= 0.001 && (c - 0.094).abs() <= 0.001,
        format!("homophily {h:.4}, conformity {c:.4}"),
    )
}

fn optimum_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut concave, mut other, mut worst) = (0, 0, 0.0f64);
    while concave < 1000 || other < 1000 {
        let scale = random_scale(&mut rng);
        let theta = random_theta(&mut rng);
        let c = theta[0] + theta[1];
        let slot = if c < 0.0 { &mut concave } else { &mut other };
        if *slot >= 1000 {
            continue;
        }
        *slot += 1;
        let q = QuadraticSelection::new(theta, scale).unwrap();
        let vi = rng.random_range(scale.min..=scale.max);
        let grid = scale.grid(10_000);
        let step = grid[1] - grid[0];
        let brute = grid
            .iter()
            .map(|&vj| q.evaluate(vi, vj))
            .fold(f64::NEG_INFINITY, f64::max);
        let opt = q.optimum_value(vi);
        let bound = 1e-9 + c.abs() * (step / 2.0).powi(2);
        let gap = opt - brute;
        if gap < -1e-9 || gap > bound {
            return Err(format!("θ = {theta:?}, v_i = {vi}: optimum {opt}, grid {brute}"));
        }
        worst = worst.max(gap / bound);
    }
    Ok(format!("2000 surfaces; largest gap {worst:.3} of its bound"))
}

fn aspiration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut counts = [0usize; 4];
    for _ in 0..10_000 {
        let scale = random_scale(&mut rng);
        let mut theta = random_theta(&mut rng);
        theta[0] = -theta[0].abs();
        theta[1] = -theta[1].abs();
        theta[2] *= 10.0;
        let v = QuadraticSelection::new(theta, scale)
            .unwrap()
            .classify_aspiration(None, 0.05)
            .map_err(|e| e.to_string())?;
        let [s, m, w] = v.tests.map(|t| t.satisfied);
        if (s && !m) || (m && !w) {
            return Err(format!("nesting broken for θ = {theta:?} on {scale:?}"));
        }
        counts[v.level as usize] += 1;
    }
    let g = grades().classify_aspiration(None, 0.05).map_err(|e| e.to_string())?;
    let a = age().classify_aspiration(None, 0.05).map_err(|e| e.to_string())?;
    check(
        g.level == AspirationLevel::Medium
            && !g.tests[0].satisfied
            && (g.tests[0].value + 0.556).abs() < 1e-3
            && a.level == AspirationLevel::Weak,
        format!(
            "nesting on 10^4 draws (none/weak/medium/strong = {counts:?}); grades {} (strong combination {:.4}); age {}",
            g.level.as_str(),
            g.tests[0].value,
            a.level.as_str()
        ),
    )
}

fn sociability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agree = 0;
    let mut weak_true = 0;
    let mut mismatches = Vec::new();
    for _ in 0..1000 {
        let scale = random_scale(&mut rng);
        let theta = random_theta(&mut rng);
        let q = QuadraticSelection::new(theta, scale).unwrap();
        let verdict = q.classify_sociability(11).weak;
        let alters = scale.grid(1000);
        let step = alters[1] - alters[0];
        let curve: Vec<f64> = scale
            .grid(1000)
            .iter()
            .map(|&vi| {
                alters
                    .iter()
                    .map(|&vj| q.evaluate(vi, vj))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        // the grid maximum undershoots by at most |θ1 + θ2| (step/2)²
        let slack = (theta[0] + theta[1]).abs() * (step / 2.0).powi(2) + 1e-12;
        let monotone = curve.windows(2).all(|w| w[1] >= w[0] - 2.0 * slack);
        let brute = monotone && curve[curve.len() - 1] - curve[0] > 2.0 * slack;
        if brute == verdict {
            agree += 1;
        } else {
            mismatches.push(theta);
        }
        weak_true += verdict as usize;
    }
    let g = grades().classify_sociability(11);
    check(
        agree == 1000 && !g.weak,
        format!(
            "{agree}/1000 agree ({weak_true} weakly sociable){}; grades weak = {}",
            if mismatches.is_empty() { String::new() } else { format!(", first mismatch {:?}", mismatches[0]) },
            g.weak
        ),
    )
}

fn delta_method() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let scale = CovariateScale::new(-10.0, 10.0, 0.0).unwrap();
    // (θ2, θ3, SE2, SE3, correlation)
    let cases: [(f64, f64, f64, f64, f64); 5] = [
        (-0.0070, 0.039, 0.0006, 0.019, 0.0),
        (-0.0070, 0.039, 0.00065, 0.019, 0.4),
        (-0.05, 0.2, 0.002, 0.03, -0.3),
        (0.8, -1.0, 0.05, 0.2, 0.0),
        (-0.2, 0.5, 0.019, 0.1, 0.6),
    ];
    let mut worst = 0.0f64;
    for (t2, t3, s2, s3, r) in cases {
        assert!(s2 / t2.abs() < 0.1);
        let c = r * s2 * s3;
        let cov = ThetaCovariance::full([
            [0.0; 5],
            [0.0, s2 * s2, c, 0.0, 0.0],
            [0.0, c, s3 * s3, 0.0, 0.0],
            [0.0; 5],
            [0.0; 5],
        ]);
        let q = QuadraticSelection::new([0.0, t2, t3, 0.0, 0.0], scale).unwrap();
        let se = q.social_norm(Some(&cov)).unwrap().std_error.unwrap();
        let z = Normal::new(0.0, 1.0).unwrap();
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                let (a, b): (f64, f64) = (z.sample(&mut rng), z.sample(&mut rng));
                let d2 = t2 + s2 * a;
                let d3 = t3 + s3 * (r * a + (1.0 - r * r).sqrt() * b);
                -d3 / (2.0 * d2)
            })
            .collect();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        let sd = (draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64).sqrt();
        worst = worst.max((sd / se - 1.0).abs());
    }
    check(worst < 0.05, format!("largest relative SE discrepancy {:.2}%", 100.0 * worst))
}

fn basis_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let scale = random_scale(&mut rng);
        let theta = random_theta(&mut rng);
        let q = QuadraticSelection::new(theta, scale).unwrap();
        let EgoAlterBasis([p1, p2, p3, p4, p5]) = q.to_ego_alter_basis();
        let back = QuadraticSelection::from_ego_alter_basis(EgoAlterBasis([p1, p2, p3, p4, p5]), scale)
            .unwrap();
        for k in 0..5 {
            worst = worst.max((back.theta[k] - theta[k]).abs());
        }
        for _ in 0..20 {
            let vi = rng.random_range(scale.min..=scale.max);
            let vj = rng.random_range(scale.min..=scale.max);
            let product = p1 * (vj - vi).powi(2) + p2 * vj * vj + p3 * vj + p4 * vi + p5 * vi * vj;
            worst = worst.max((product - q.evaluate(vi, vj)).abs());
        }
    }
    check(worst <= 1e-12, format!("largest discrepancy {worst:.2e}"))
}

fn all_effects(cov: &str) -> Vec<EffectSpec> {
    EffectKind::ALL
        .iter()
        .map(|&k| {
            if k.needs_covariate() {
                EffectSpec::covariate(k, cov).unwrap()
            } else {
                EffectSpec::structural(k).unwrap()
            }
        })
        .collect()
}

fn change_score_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(2..=10);
        let density = rng.random_range(0.0..1.0);
        let net = DirectedNetwork::bernoulli(n, density, &mut rng).unwrap();
        let raw: Vec<f64> = (0..n).map(|k| (k % 3) as f64 + rng.random_range(-1..=1) as f64).collect();
        let raw = if raw.iter().all(|v| *v == raw[0]) { (0..n).map(|k| k as f64).collect() } else { raw };
        let covs = Covariates::new().with(ActorCovariate::new("v", raw, rng.random(), None).unwrap());
        let mut effects = Vec::new();
        for e in all_effects("v") {
            if !rng.random_bool(0.5) {
                continue;
            }
            effects.push(if e.kind.is_gwesp() {
                EffectSpec::gwesp(e.kind, rng.random_range(0.1..2.0)).unwrap()
            } else {
                e
            });
        }
        let beta = (0..effects.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let params = ParameterVector::new(effects, beta).unwrap();
        let i = rng.random_range(0..n);
        let inc = change_scores(&params, &net, &covs, i).map_err(|e| e.to_string())?;
        let f0 = evaluation_function(&params, &net, &covs, i).unwrap();
        for j in 0..n {
            let full = if j == i {
                0.0
            } else {
                evaluation_function(&params, &net.toggle(i, j).unwrap(), &covs, i).unwrap() - f0
            };
            worst = worst.max((full - inc[j]).abs());
        }
    }
    check(worst <= 1e-10, format!("500 triples; largest discrepancy {worst:.2e}"))
}

fn simulator_calibration() -> Outcome {
    let n = 20;
    let covs = Covariates::new();
    let params = ParameterVector::new(
        vec![EffectSpec::structural(EffectKind::Outdegree).unwrap()],
        vec![0.0],
    )
    .unwrap();
    let sim = Simulator::new(&params, &covs, n).unwrap();
    // choice frequencies by offset (target − actor) mod n; offset 0 is "no change"
    let mut counts = vec![0usize; n];
    let mut events = 0;
    let mut rng = substream(9, 0);
    let mut net = DirectedNetwork::bernoulli(n, 0.3, &mut rng).unwrap();
    while events < 10_000 {
        let out = sim.run_period_observed(&net, 5.0, 1.0, 10_000 - events, &mut rng, |e, _| {
            counts[(e.target + n - e.actor) % n] += 1;
        });
        events += out.events;
        net = out.end;
    }
    let p = 1.0 / n as f64;
    let sigma = (events as f64 * p * (1.0 - p)).sqrt();
    let expected = events as f64 * p;
    let max_dev = counts
        .iter()
        .map(|&c| (c as f64 - expected).abs() / sigma)
        .fold(0.0, f64::max);
    let mut total = 0;
    for r in 0..200 {
        let mut rng = substream(10, r);
        let start = DirectedNetwork::bernoulli(n, 0.2, &mut rng).unwrap();
        total += sim.run_period(&start, 5.0, 1.0, 1_000_000, &mut rng).events;
    }
    let mean = total as f64 / 200.0;
    check(
        max_dev <= 3.0 && (mean / 100.0 - 1.0).abs() <= 0.05,
        format!("{events} choices, largest deviation {max_dev:.2}σ; mean events {mean:.2} vs 100"),
    )
}

struct Replicate {
    panel: NetworkPanel,
    truth: Vec<f64>,
    effects: Vec<EffectSpec>,
}

fn recovery_panel(seed: u64) -> Replicate {
    let n = 30;
    let rate = 5.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..=3.0)).collect();
    let covs = Covariates::new().with(ActorCovariate::new("v", raw, false, Some((-3.0, 3.0))).unwrap());
    let effects = vec![
        EffectSpec::structural(EffectKind::Outdegree).unwrap(),
        EffectSpec::structural(EffectKind::Reciprocity).unwrap(),
        EffectSpec::covariate(EffectKind::CovDiffSq, "v").unwrap(),
        EffectSpec::covariate(EffectKind::CovAlter, "v").unwrap(),
        EffectSpec::covariate(EffectKind::CovEgo, "v").unwrap(),
    ];
    let beta = vec![-2.0, 1.5, -0.05, 0.2, -0.1];
    let params = ParameterVector::new(effects.clone(), beta.clone()).unwrap();
    let first = DirectedNetwork::bernoulli(n, 0.15, &mut rng).unwrap();
    let sim = Simulator::new(&params, &covs, n).unwrap();
    let second = sim.run_period(&first, rate, 1.0, 1_000_000, &mut substream(seed, 0)).end;
    let panel = NetworkPanel::with_default_labels(vec![first, second], covs).unwrap();
    let mut truth = vec![rate];
    truth.extend(beta);
    Replicate {
        panel,
        truth,
        effects,
    }
}

fn estimation_recovery() -> Outcome {
    let mut covered = 0;
    let mut pairs = 0;
    let mut converged = 0;
    let mut bad_conv = 0;
    let mut fits: Vec<MoMResult> = Vec::new();
    for rep in 0..20u64 {
        let r = recovery_panel(1000 + rep);
        let fit = match estimate(&r.panel, &r.effects, &MomOptions { seed: 2000 + rep, ..MomOptions::default() }) {
            Ok(f) => f,
            Err(e) => {
                // a failed fit recovers nothing
                println!("      replication {rep} failed: {e}");
                pairs += r.truth.len();
                continue;
            }
        };
        for (k, t) in r.truth.iter().enumerate() {
            pairs += 1;
            if (fit.theta[k] - t).abs() <= 2.0 * fit.std_errors[k] {
                covered += 1;
            }
        }
        if fit.converged {
            converged += 1;
            if !(fit.conv_t_ratios.iter().all(|t| t.abs() < 0.1) && fit.max_conv_ratio < 0.25) {
                bad_conv += 1;
            }
        }
        fits.push(fit);
    }
    // reported SEs against the spread of the estimates
    let p = fits.first().map_or(0, |f| f.theta.len());
    let ratios: Vec<String> = (0..p)
        .map(|k| {
            let m = fits.iter().map(|f| f.theta[k]).sum::<f64>() / fits.len() as f64;
            let sd = (fits.iter().map(|f| (f.theta[k] - m).powi(2)).sum::<f64>() / (fits.len() - 1) as f64).sqrt();
            let se = fits.iter().map(|f| f.std_errors[k]).sum::<f64>() / fits.len() as f64;
            format!("{:.2}", se / sd)
        })
        .collect();
    let share = covered as f64 / pairs as f64;
    check(
        share >= 0.9 && bad_conv == 0 && converged > 0,
        format!(
            "{covered}/{pairs} within 2 SE ({:.1}%); {converged}/20 converged; mean SE / SD of estimates [{}]",
            100.0 * share,
            ratios.join(", ")
        ),
    )
}

fn gof_calibration() -> Outcome {
    let mut inside = 0;
    let mut total = 0;
    let mut per_family = [0usize; 4];
    for rep in 0..50u64 {
        let r = recovery_panel(5000 + rep);
        let opts = MomOptions {
            seed: 6000 + rep,
            phase3_runs: 500,
            ..MomOptions::default()
        };
        let fit = match estimate(&r.panel, &r.effects, &opts) {
            Ok(f) => f,
            Err(e) => {
                println!("      replication {rep} failed: {e}");
                total += GofFamily::ALL.len();
                continue;
            }
        };
        let reports = gof_families(&r.panel, &fit, &GofFamily::ALL, 200, 7000 + rep)
            .map_err(|e| e.to_string())?;
        for (k, g) in reports.iter().enumerate() {
            total += 1;
            if g.p_value > 0.05 && g.p_value < 0.95 {
                inside += 1;
                per_family[k] += 1;
            }
        }
    }
    let share = inside as f64 / total as f64;
    check(
        share >= 0.85,
        format!(
            "{inside}/{total} p-values in (0.05, 0.95) ({:.1}%); per family (in, out, geodesic, triad) {per_family:?} of 50",
            100.0 * share
        ),
    )
}

fn gwesp_units() -> Outcome {
    let a = std::f64::consts::LN_2;
    let v = [0, 1, 2].map(|s| gwesp_contribution(a, s));
    check(v == [0.0, 1.0, 1.5], format!("{v:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("social-norm golden values", social_norm),
        ("attraction weights", attraction_weights),
        ("optimum oracle", optimum_oracle),
        ("aspiration suite", aspiration),
        ("sociability oracle", sociability),
        ("delta-method SE", delta_method),
        ("basis equivalence", basis_equivalence),
        ("change-score oracle", change_score_oracle),
        ("simulator calibration", simulator_calibration),
        ("estimation recovery", estimation_recovery),
        ("GOF calibration", gof_calibration),
        ("gwesp unit values", gwesp_units),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != k + 1) {
            continue;
        }
        let t = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail} [{:.1}s]", k + 1, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
