//! Method-of-moments estimation of rate and effect parameters by Robbins–Monro stochastic
//! approximation.
//!
//! Parameters are ordered with one rate per period first, followed by the effect weights.
//! Statistics follow the same order: the Hamming distance between consecutive waves for each
//! rate, then each effect statistic summed over actors and over the end waves of all periods.
//! Every period is simulated starting from the observed wave that opens it, so the first wave
//! is conditioned on and never modeled.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effects::{BoundEffects, EffectSpec, ParameterVector};
use crate::error::EstimationError;
use crate::linalg::{from_rows, mean_covariance, pinv_symmetric, to_rows};
use crate::network::NetworkPanel;
use crate::sim::{substream, RateParameters, Simulator};

const PHASE1_STREAM: u64 = 0x1000_0000;
const PHASE2_STREAM: u64 = 0x2000_0000;
const PHASE3_STREAM: u64 = 0x3000_0000;
const RESTART_STREAM_OFFSET: u64 = 0x0100_0000;
/// Phase-2 stream offset for the rerun with a diagonal update matrix.
const DIAGONAL_STREAM_OFFSET: u64 = 0x0080_0000;
/// Phase 2 counts as diverging once one statistic stays clipped this many iterations in a row.
const DIVERGENCE_RUN: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MomOptions {
    pub seed: u64,
    pub phase1_runs: usize,
    pub phase2_subphases: usize,
    pub gain_initial: f64,
    pub phase3_runs: usize,
    /// Restarts from the current estimate when the convergence check fails.
    pub max_restarts: usize,
    pub conv_t_threshold: f64,
    pub max_conv_ratio_threshold: f64,
    pub period_length: f64,
    pub max_events: usize,
    /// Weight of the diagonal of `D` in the phase-2 update matrix: 0 uses `D`, 1 uses
    /// only its diagonal.
    pub diagonalize: f64,
    /// Phase-2 deviations are clipped to this many simulated standard deviations.
    pub max_deviation_sd: f64,
    /// Starting values (rates then effects); derived from the data when absent.
    pub initial: Option<Vec<f64>>,
}

impl Default for MomOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            phase1_runs: 50,
            phase2_subphases: 4,
            gain_initial: 0.2,
            phase3_runs: 1000,
            max_restarts: 3,
            conv_t_threshold: 0.1,
            max_conv_ratio_threshold: 0.25,
            period_length: 1.0,
            max_events: 1_000_000,
            diagonalize: 0.2,
            max_deviation_sd: 4.0,
            initial: None,
        }
    }
}

impl MomOptions {
    fn validate(&self, n_params: usize) -> Result<(), EstimationError> {
        let bad = |m: &str| Err(EstimationError::Invalid(m.to_string()));
        if self.phase1_runs < 2 {
            return bad("phase 1 needs at least 2 runs");
        }
        if self.phase2_subphases == 0 {
            return bad("phase 2 needs at least one subphase");
        }
        if !(self.gain_initial > 0.0 && self.gain_initial.is_finite()) {
            return bad("initial gain must be positive");
        }
        if self.phase3_runs < 2 {
            return bad("phase 3 needs at least 2 runs");
        }
        if !(self.period_length > 0.0 && self.period_length.is_finite()) {
            return bad("period length must be positive");
        }
        if self.max_events == 0 {
            return bad("max_events must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.diagonalize) {
            return bad("diagonalize must lie in [0, 1]");
        }
        if !(self.max_deviation_sd > 0.0) {
            return bad("max_deviation_sd must be positive");
        }
        if let Some(init) = &self.initial {
            if init.len() != n_params {
                return Err(EstimationError::Invalid(format!(
                    "{} initial values for {n_params} parameters",
                    init.len()
                )));
            }
            if init.iter().any(|v| !v.is_finite()) {
                return bad("non-finite initial value");
            }
        }
        Ok(())
    }
}

/// Gains used in the successive phase-2 subphases.
pub fn phase2_gains(options: &MomOptions) -> Vec<f64> {
    (0..options.phase2_subphases)
        .map(|k| options.gain_initial * 0.5f64.powi(k as i32))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoMResult {
    pub effects: Vec<EffectSpec>,
    pub parameter_names: Vec<String>,
    pub n_rates: usize,
    /// Rates then effect weights.
    pub theta: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub std_errors: Vec<f64>,
    pub targets: Vec<f64>,
    pub simulated_means: Vec<f64>,
    pub conv_t_ratios: Vec<f64>,
    pub max_conv_ratio: f64,
    pub n_phase3: usize,
    pub converged: bool,
    pub restarts: usize,
    pub derivative: Vec<Vec<f64>>,
}

impl MoMResult {
    pub fn rates(&self) -> &[f64] {
        &self.theta[..self.n_rates]
    }

    pub fn beta(&self) -> &[f64] {
        &self.theta[self.n_rates..]
    }

    pub fn rate_parameters(&self) -> RateParameters {
        RateParameters {
            rho: self.rates().to_vec(),
        }
    }

    pub fn parameter_vector(&self) -> ParameterVector {
        ParameterVector {
            effects: self.effects.clone(),
            beta: self.beta().to_vec(),
        }
    }

    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.covariance)
    }

    /// Position of the effect with the given display name, e.g. `altX(grade)`, in `theta`.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.parameter_names.iter().position(|p| p == name)
    }
}

pub fn parameter_names(n_periods: usize, effects: &[EffectSpec]) -> Vec<String> {
    (1..=n_periods)
        .map(|m| format!("rate{m}"))
        .chain(effects.iter().map(|e| e.to_string()))
        .collect()
}

/// Observed targets: per-period Hamming distances, then effect totals summed over end waves.
pub fn target_statistics(
    panel: &NetworkPanel,
    effects: &[EffectSpec],
) -> Result<Vec<f64>, EstimationError> {
    if panel.waves().len() < 2 {
        return Err(EstimationError::Invalid("panel needs at least 2 waves".into()));
    }
    let bound = BoundEffects::new(effects, panel.covariates(), panel.n())?;
    let waves = panel.waves();
    let mut t: Vec<f64> = waves.windows(2).map(|w| w[0].hamming(&w[1]) as f64).collect();
    let mut tot = vec![0.0; effects.len()];
    for w in &waves[1..] {
        tot.iter_mut()
            .zip(bound.totals(w))
            .for_each(|(a, b)| *a += b);
    }
    t.extend(tot);
    Ok(t)
}

/// Starting values: rates from the observed change counts, outdegree at the log-odds of the
/// mean density, everything else zero.
pub fn default_initial(panel: &NetworkPanel, effects: &[EffectSpec]) -> Vec<f64> {
    let n = panel.n() as f64;
    let waves = panel.waves();
    let mut theta: Vec<f64> = waves
        .windows(2)
        .map(|w| (1.2 * w[0].hamming(&w[1]) as f64 / n).max(0.1))
        .collect();
    let dens = waves.iter().map(|w| w.density()).sum::<f64>() / waves.len() as f64;
    let dens = dens.clamp(0.01, 0.99);
    for e in effects {
        theta.push(if e.kind == crate::effects::EffectKind::Outdegree {
            (dens / (1.0 - dens)).ln()
        } else {
            0.0
        });
    }
    theta
}

struct Model<'a> {
    sim: Simulator<'a>,
    panel: &'a NetworkPanel,
    n_rates: usize,
    seed: u64,
    period_length: f64,
    max_events: usize,
}

impl Model<'_> {
    fn n_params(&self) -> usize {
        self.n_rates + self.sim.effects().len()
    }

    fn statistics(&self, theta: &[f64], stream: u64) -> Vec<f64> {
        let mut rng = substream(self.seed, stream);
        let (rates, beta) = theta.split_at(self.n_rates);
        let mut s = vec![0.0; self.n_params()];
        let waves = self.panel.waves();
        for (m, &rate) in rates.iter().enumerate() {
            let out = self.sim.run_period_with(
                beta,
                &waves[m],
                rate.max(0.0),
                self.period_length,
                self.max_events,
                &mut rng,
            );
            s[m] = waves[m].hamming(&out.end) as f64;
            for (k, v) in self.sim.effects().totals(&out.end).into_iter().enumerate() {
                s[self.n_rates + k] += v;
            }
        }
        s
    }

    /// Forward-difference derivative estimate with common random numbers, plus the statistics
    /// simulated at `theta` itself.
    fn derivative(
        &self,
        theta: &[f64],
        runs: usize,
        stream_base: u64,
    ) -> (DMatrix<f64>, Vec<Vec<f64>>) {
        let p = self.n_params();
        let h = steps(theta);
        let per_run: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..runs as u64)
            .into_par_iter()
            .map(|r| {
                let stream = stream_base + r;
                let base = self.statistics(theta, stream);
                let diffs = (0..p)
                    .map(|k| {
                        let mut t = theta.to_vec();
                        t[k] += h[k];
                        let s = self.statistics(&t, stream);
                        s.iter().zip(&base).map(|(a, b)| (a - b) / h[k]).collect()
                    })
                    .collect();
                (base, diffs)
            })
            .collect();
        let mut d = DMatrix::zeros(p, p);
        let mut base = Vec::with_capacity(runs);
        for (b, diffs) in per_run {
            for (k, col) in diffs.iter().enumerate() {
                for (s, v) in col.iter().enumerate() {
                    d[(s, k)] += v;
                }
            }
            base.push(b);
        }
        d /= runs as f64;
        (d, base)
    }
}

fn steps(theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|t| 0.1 * t.abs().max(0.3)).collect()
}

fn invert_derivative(d: &DMatrix<f64>, names: &[String]) -> Result<DMatrix<f64>, EstimationError> {
    let p = d.nrows();
    let singular = |v: Option<DVector<f64>>| {
        let statistics = match v {
            Some(v) => names
                .iter()
                .zip(v.iter())
                .filter(|(_, c)| c.abs() >= 0.3)
                .map(|(n, _)| n.clone())
                .collect(),
            None => names.to_vec(),
        };
        EstimationError::SingularDerivative { statistics }
    };
    if d.iter().any(|v| !v.is_finite()) {
        return Err(singular(None));
    }
    let svd = d.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (kmin, smin) = sv
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (k, &s)| if s < a.1 { (k, s) } else { a });
    let smax = sv.max();
    if p == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if !(smax > 0.0) || smin <= 1e-10 * smax {
        let v_t = svd.v_t.as_ref().expect("requested");
        return Err(singular(Some(v_t.row(kmin).transpose())));
    }
    d.clone().try_inverse().ok_or_else(|| singular(None))
}

fn sub(a: &[f64], b: &[f64]) -> DVector<f64> {
    DVector::from_iterator(a.len(), a.iter().zip(b).map(|(x, y)| x - y))
}

/// Update rule `θ ← θ − a·M·clip(s − target)`, with `M` the inverse of a partially
/// diagonalized derivative matrix and deviations clipped in units of simulated SDs.
struct Updater {
    m: DMatrix<f64>,
    sd: Vec<f64>,
    max_sd: f64,
    n_rates: usize,
}

impl Updater {
    fn new(
        d: &DMatrix<f64>,
        sd: Vec<f64>,
        options: &MomOptions,
        diagonalize: f64,
        n_rates: usize,
        names: &[String],
    ) -> Result<Self, EstimationError> {
        let p = d.nrows();
        let mut used = d * (1.0 - diagonalize);
        for k in 0..p {
            used[(k, k)] = d[(k, k)];
        }
        Ok(Self {
            m: invert_derivative(&used, names)?,
            sd,
            max_sd: options.max_deviation_sd,
            n_rates,
        })
    }

    /// Applies one update and flags the statistics whose deviation was clipped.
    fn step(&self, theta: &mut [f64], s: &[f64], targets: &[f64], gain: f64, clipped: &mut [bool]) {
        let dev = DVector::from_iterator(
            s.len(),
            (0..s.len()).map(|k| {
                let d = s[k] - targets[k];
                let lim = self.max_sd * self.sd[k];
                clipped[k] = lim > 0.0 && d.abs() > lim;
                if lim > 0.0 {
                    d.clamp(-lim, lim)
                } else {
                    d
                }
            }),
        );
        let delta = &self.m * dev * gain;
        for k in 0..theta.len() {
            let next = theta[k] - delta[k];
            theta[k] = if k < self.n_rates && next <= 0.0 { theta[k] / 2.0 } else { next };
        }
    }
}

fn std_devs(cov: &DMatrix<f64>) -> Vec<f64> {
    (0..cov.nrows()).map(|k| cov[(k, k)].max(0.0).sqrt()).collect()
}

struct Phase3 {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    d: DMatrix<f64>,
    conv_t: Vec<f64>,
    max_ratio: f64,
}

fn phase3(model: &Model, theta: &[f64], targets: &[f64], runs: usize, base: u64) -> Phase3 {
    let (d, stats) = model.derivative(theta, runs, base);
    let (mean, cov) = mean_covariance(&stats);
    let dev = sub(mean.as_slice(), targets);
    let conv_t = (0..targets.len())
        .map(|k| {
            let sd = cov[(k, k)].sqrt();
            if sd > 0.0 {
                dev[k] / sd
            } else if dev[k] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    // largest standardized deviation of any linear combination of the statistics
    let max_ratio = if dev.iter().all(|v| *v == 0.0) {
        0.0
    } else {
        dev.dot(&(pinv_symmetric(&cov) * &dev)).max(0.0).sqrt()
    };
    Phase3 {
        mean,
        cov,
        d,
        conv_t,
        max_ratio,
    }
}

/// Three-phase method-of-moments estimation.
pub fn estimate(
    panel: &NetworkPanel,
    effects: &[EffectSpec],
    options: &MomOptions,
) -> Result<MoMResult, EstimationError> {
    let n_rates = panel.n_periods();
    let n_params = n_rates + effects.len();
    options.validate(n_params)?;
    let targets = target_statistics(panel, effects)?;
    let names = parameter_names(n_rates, effects);
    let params = ParameterVector::zeros(effects.to_vec());
    let model = Model {
        sim: Simulator::new(&params, panel.covariates(), panel.n())?,
        panel,
        n_rates,
        seed: options.seed,
        period_length: options.period_length,
        max_events: options.max_events,
    };
    let mut theta = options
        .initial
        .clone()
        .unwrap_or_else(|| default_initial(panel, effects));

    // phase 1
    let (mut d, base) = model.derivative(&theta, options.phase1_runs, PHASE1_STREAM);
    let (mean, base_cov) = mean_covariance(&base);
    // an own derivative below one net unit of change summed over all runs is
    // finite-difference noise and could reverse the update direction; decouple that
    // parameter and fall back to the statistic's variance
    log::debug!("phase 1 at {theta:?}: derivative {d}");
    let h = steps(&theta);
    for k in 0..n_params {
        if d[(k, k)] * h[k] * (options.phase1_runs as f64) < 1.0 {
            log::warn!("phase 1: derivative of {} in its own parameter is {}", names[k], d[(k, k)]);
            d.row_mut(k).fill(0.0);
            d.column_mut(k).fill(0.0);
            d[(k, k)] = base_cov[(k, k)].max(1.0);
        }
    }
    let sd = std_devs(&base_cov);
    let mut updater = Updater::new(&d, sd.clone(), options, options.diagonalize, n_rates, &names)?;
    updater.step(&mut theta, mean.as_slice(), &targets, 0.5, &mut vec![false; n_params]);

    let mut restarts = 0;
    loop {
        let offset = restarts as u64 * RESTART_STREAM_OFFSET;
        let stream = PHASE2_STREAM + offset;
        theta = match phase2(&model, theta.clone(), &targets, &updater, options, stream) {
            Ok(t) => t,
            Err(_) => {
                // off-diagonal derivative noise can turn the update unstable; the diagonal
                // part alone still points each parameter the right way
                log::warn!("phase 2 diverged; rerunning with a diagonal update matrix");
                let diagonal = Updater::new(&d, sd.clone(), options, 1.0, n_rates, &names)?;
                phase2(&model, theta, &targets, &diagonal, options, stream + DIAGONAL_STREAM_OFFSET)
                    .unwrap_or_else(|t| t)
            }
        };
        let p3 = phase3(&model, &theta, &targets, options.phase3_runs, PHASE3_STREAM + offset);
        let converged = p3.conv_t.iter().all(|t| t.abs() < options.conv_t_threshold)
            && p3.max_ratio < options.max_conv_ratio_threshold;
        let d3_inv = invert_derivative(&p3.d, &names)?;
        if converged || restarts == options.max_restarts {
            if !converged {
                log::warn!(
                    "estimation did not converge after {restarts} restarts (max ratio {:.3})",
                    p3.max_ratio
                );
            }
            let cov = &d3_inv * &p3.cov * d3_inv.transpose();
            let std_errors = (0..n_params).map(|k| cov[(k, k)].max(0.0).sqrt()).collect();
            return Ok(MoMResult {
                effects: effects.to_vec(),
                parameter_names: names,
                n_rates,
                theta,
                covariance: to_rows(&cov),
                std_errors,
                targets,
                simulated_means: p3.mean.iter().copied().collect(),
                conv_t_ratios: p3.conv_t,
                max_conv_ratio: p3.max_ratio,
                n_phase3: options.phase3_runs,
                converged,
                restarts,
                derivative: to_rows(&p3.d),
            });
        }
        log::info!("restart {} (max convergence ratio {:.3})", restarts + 1, p3.max_ratio);
        updater = Updater::new(&p3.d, std_devs(&p3.cov), options, options.diagonalize, n_rates, &names)?;
        restarts += 1;
    }
}

fn phase2(
    model: &Model,
    mut theta: Vec<f64>,
    targets: &[f64],
    updater: &Updater,
    options: &MomOptions,
    stream_base: u64,
) -> Result<Vec<f64>, Vec<f64>> {
    let p = theta.len();
    let mut clipped = vec![false; p];
    let mut clipped_run = vec![0usize; p];
    let mut stream = stream_base;
    for (k, gain) in phase2_gains(options).into_iter().enumerate() {
        let n_min = (2.52f64.powi(k as i32) * (7 + p) as f64).ceil() as usize;
        let n_max = n_min + 200;
        let mut sum = vec![0.0; p];
        let mut prev: Option<DVector<f64>> = None;
        let mut cross = vec![0.0; p];
        let mut iters = 0;
        while iters < n_max {
            let s = model.statistics(&theta, stream);
            stream += 1;
            let dev = sub(&s, targets);
            if let Some(pd) = &prev {
                for j in 0..p {
                    cross[j] += dev[j] * pd[j];
                }
            }
            updater.step(&mut theta, &s, targets, gain, &mut clipped);
            for (run, &c) in clipped_run.iter_mut().zip(&clipped) {
                *run = if c { *run + 1 } else { 0 };
            }
            if clipped_run.iter().any(|&r| r >= DIVERGENCE_RUN) {
                return Err(theta);
            }
            sum.iter_mut().zip(&theta).for_each(|(a, b)| *a += b);
            prev = Some(dev);
            iters += 1;
            if iters >= n_min && cross.iter().all(|c| *c <= 0.0) {
                break;
            }
        }
        theta = sum.iter().map(|s| s / iters as f64).collect();
        log::debug!("subphase {} ended after {iters} iterations at {theta:?}", k + 1);
    }
    Ok(theta)
}
