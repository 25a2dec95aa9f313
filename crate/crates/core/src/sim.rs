//! Continuous-time Markov chain simulation of network evolution between observations.
//!
//! Every actor receives change opportunities at rate `ρ`, so opportunities arrive at total
//! rate `n·ρ` and the opportunity goes to a uniformly chosen actor `i`. The actor then
//! toggles at most one outgoing tie: target `j` is chosen with probability proportional to
//! `exp(f_i(x^{±ij}) − f_i(x))`, where `j = i` stands for leaving the network unchanged.
//!
//! Each event consumes exactly three uniforms (waiting time, actor, target), so runs that
//! share a random stream stay aligned when parameters are perturbed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::effects::{BoundEffects, NetworkCache, ParameterVector};
use crate::error::SimError;
use crate::network::{Covariates, DirectedNetwork, NetworkPanel};

pub type SimRng = ChaCha8Rng;

/// Random stream `stream` of the generator seeded with `seed`.
///
/// Streams are independent ChaCha8 sequences, so replicate `r` of a batch draws the same
/// numbers whether the batch runs serially or in parallel.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-period opportunity rates `ρ_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateParameters {
    pub rho: Vec<f64>,
}

impl RateParameters {
    pub fn new(rho: Vec<f64>) -> Result<Self, SimError> {
        for &r in &rho {
            check_rate(r)?;
        }
        Ok(Self { rho })
    }
}

fn check_rate(r: f64) -> Result<(), SimError> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(SimError::InvalidRate(r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub seed: u64,
    pub period_length: f64,
    pub max_events: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            period_length: 1.0,
            max_events: 1_000_000,
        }
    }
}

impl SimOptions {
    fn validate(&self) -> Result<(), SimError> {
        if !(self.period_length.is_finite() && self.period_length >= 0.0) {
            return Err(SimError::InvalidOptions(format!(
                "period length {} must be finite and nonnegative",
                self.period_length
            )));
        }
        if self.max_events == 0 {
            return Err(SimError::InvalidOptions("max_events must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodOutcome {
    pub end: DirectedNetwork,
    /// Change opportunities used, including those where nothing changed.
    pub events: usize,
    /// Tie toggles performed.
    pub toggles: usize,
    /// The event cap was reached before the end of the period.
    pub truncated: bool,
}

/// One change opportunity: `target == actor` means no change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub actor: usize,
    pub target: usize,
}

/// Multinomial-logit probabilities over change scores, stabilized by subtracting the maximum.
pub fn choice_probabilities(scores: &[f64]) -> Vec<f64> {
    let mut p = scores.to_vec();
    softmax_in_place(&mut p);
    p
}

fn softmax_in_place(x: &mut [f64]) {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in x.iter_mut() {
        *v = (*v - m).exp();
        total += *v;
    }
    x.iter_mut().for_each(|v| *v /= total);
}

/// Simulation engine for one model specification on a fixed actor set.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    effects: BoundEffects<'a>,
    beta: Vec<f64>,
}

impl<'a> Simulator<'a> {
    pub fn new(params: &ParameterVector, covs: &'a Covariates, n: usize) -> Result<Self, SimError> {
        let effects = BoundEffects::new(&params.effects, covs, n)?;
        Ok(Self {
            effects,
            beta: params.beta.clone(),
        })
    }

    pub fn effects(&self) -> &BoundEffects<'a> {
        &self.effects
    }

    pub fn set_beta(&mut self, beta: &[f64]) {
        self.beta.copy_from_slice(beta);
    }

    pub fn run_period<R: Rng + ?Sized>(
        &self,
        start: &DirectedNetwork,
        rate: f64,
        period_length: f64,
        max_events: usize,
        rng: &mut R,
    ) -> PeriodOutcome {
        self.run_period_observed(start, rate, period_length, max_events, rng, |_, _| {})
    }

    /// Runs one period, reporting each opportunity with the choice probabilities used.
    pub fn run_period_observed<R: Rng + ?Sized, F: FnMut(&Event, &[f64])>(
        &self,
        start: &DirectedNetwork,
        rate: f64,
        period_length: f64,
        max_events: usize,
        rng: &mut R,
        observe: F,
    ) -> PeriodOutcome {
        self.run_with(&self.beta, start, rate, period_length, max_events, rng, observe)
    }

    /// Runs one period with the effect weights `beta` instead of the stored ones.
    pub fn run_period_with<R: Rng + ?Sized>(
        &self,
        beta: &[f64],
        start: &DirectedNetwork,
        rate: f64,
        period_length: f64,
        max_events: usize,
        rng: &mut R,
    ) -> PeriodOutcome {
        self.run_with(beta, start, rate, period_length, max_events, rng, |_, _| {})
    }

    #[allow(clippy::too_many_arguments)]
    fn run_with<R: Rng + ?Sized, F: FnMut(&Event, &[f64])>(
        &self,
        beta: &[f64],
        start: &DirectedNetwork,
        rate: f64,
        period_length: f64,
        max_events: usize,
        rng: &mut R,
        mut observe: F,
    ) -> PeriodOutcome {
        assert_eq!(beta.len(), self.effects.len(), "one weight per effect");
        let n = start.n();
        let mut net = start.clone();
        let mut outcome = PeriodOutcome {
            end: start.clone(),
            events: 0,
            toggles: 0,
            truncated: false,
        };
        let total_rate = n as f64 * rate;
        if !(total_rate > 0.0) || !(period_length > 0.0) {
            return outcome;
        }
        let mut cache = NetworkCache::new(&net);
        let mut probs = vec![0.0; n];
        let mut scratch = vec![0.0; self.effects.len()];
        let mut t = 0.0;
        loop {
            let u: f64 = rng.random();
            t += -(1.0 - u).ln() / total_rate;
            if t >= period_length {
                break;
            }
            if outcome.events == max_events {
                outcome.truncated = true;
                break;
            }
            let ua: f64 = rng.random();
            let i = ((ua * n as f64) as usize).min(n - 1);
            self.effects
                .change_scores_into(beta, &net, &cache, i, &mut probs, &mut scratch);
            softmax_in_place(&mut probs);
            let uc: f64 = rng.random();
            let mut acc = 0.0;
            let mut j = n - 1;
            for (k, p) in probs.iter().enumerate() {
                acc += p;
                if uc < acc {
                    j = k;
                    break;
                }
            }
            outcome.events += 1;
            observe(
                &Event {
                    time: t,
                    actor: i,
                    target: j,
                },
                &probs,
            );
            if j != i {
                net.toggle_mut(i, j).expect("indices in range");
                cache.apply_toggle(&net, i, j);
                outcome.toggles += 1;
            }
        }
        if outcome.truncated {
            log::warn!(
                "simulation stopped at the event cap ({max_events}) before the end of the period"
            );
        }
        outcome.end = net;
        outcome
    }
}

/// Simulates one observation period starting from `start`.
pub fn simulate_period(
    start: &DirectedNetwork,
    params: &ParameterVector,
    rate: f64,
    covs: &Covariates,
    opts: &SimOptions,
) -> Result<PeriodOutcome, SimError> {
    check_rate(rate)?;
    opts.validate()?;
    let sim = Simulator::new(params, covs, start.n())?;
    let mut rng = substream(opts.seed, 0);
    Ok(sim.run_period(start, rate, opts.period_length, opts.max_events, &mut rng))
}

/// Chains `n_periods` simulated periods, each starting from the previous simulated wave.
pub fn simulate_panel(
    start: &DirectedNetwork,
    params: &ParameterVector,
    rates: &RateParameters,
    covs: &Covariates,
    n_periods: usize,
    opts: &SimOptions,
) -> Result<NetworkPanel, SimError> {
    if rates.rho.len() != n_periods {
        return Err(SimError::RateCount {
            expected: n_periods,
            got: rates.rho.len(),
        });
    }
    opts.validate()?;
    let sim = Simulator::new(params, covs, start.n())?;
    let mut rng = substream(opts.seed, 0);
    let mut waves = vec![start.clone()];
    for &rate in &rates.rho {
        check_rate(rate)?;
        let prev = waves.last().expect("at least one wave");
        let out = sim.run_period(prev, rate, opts.period_length, opts.max_events, &mut rng);
        waves.push(out.end);
    }
    NetworkPanel::with_default_labels(waves, covs.clone())
        .map_err(|e| SimError::InvalidOptions(e.to_string()))
}

/// Independent replicates of one period, replicate `r` drawing from substream `r`.
pub fn simulate_period_batch(
    start: &DirectedNetwork,
    params: &ParameterVector,
    rate: f64,
    covs: &Covariates,
    opts: &SimOptions,
    replicates: usize,
) -> Result<Vec<PeriodOutcome>, SimError> {
    check_rate(rate)?;
    opts.validate()?;
    let sim = Simulator::new(params, covs, start.n())?;
    Ok((0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(opts.seed, r);
            sim.run_period(start, rate, opts.period_length, opts.max_events, &mut rng)
        })
        .collect())
}
