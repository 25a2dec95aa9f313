//! Simulation-based goodness of fit on auxiliary network statistics.
//!
//! Observed statistics, summed over the end waves of all periods, are compared with their
//! distribution over networks simulated from the fitted model, each period starting from the
//! observed wave that opens it. The comparison uses the Mahalanobis distance with a
//! pseudo-inverse of the simulated covariance.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::EstimationError;
use crate::estimation::MoMResult;
use crate::linalg::{mean_covariance, pinv_symmetric};
use crate::network::{DirectedNetwork, NetworkPanel};
use crate::sim::{substream, Simulator};

const GOF_STREAM: u64 = 0x4000_0000;

/// Largest degree with its own cumulative count.
pub const MAX_DEGREE: usize = 8;
/// Largest distance with its own count; longer finite distances share one bucket.
pub const MAX_GEODESIC: usize = 5;

pub const TRIAD_NAMES: [&str; 16] = [
    "003", "012", "102", "021D", "021U", "021C", "111D", "111U", "030T", "030C", "201", "120D",
    "120U", "120C", "210", "300",
];

/// Triad classes in which every two-path is closed.
pub const TRANSITIVE_TRIADS: [&str; 4] = ["030T", "120D", "120U", "300"];

/// Class number (1-based) of each of the 64 tie configurations of an ordered triple
/// `(v, u, w)`, indexed by the sum of `v→u: 1, u→v: 2, v→w: 4, w→v: 8, u→w: 16, w→u: 32`.
const TRICODES: [u8; 64] = [
    1, 2, 2, 3, 2, 4, 6, 8, 2, 6, 5, 7, 3, 8, 7, 11, 2, 6, 4, 8, 5, 9, 9, 13, 6, 10, 9, 14, 7,
    14, 12, 15, 2, 5, 6, 7, 6, 9, 10, 14, 4, 9, 9, 12, 8, 13, 14, 15, 3, 7, 8, 11, 7, 12, 14, 15,
    8, 14, 13, 15, 11, 15, 15, 16,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GofFamily {
    IndegreeDistribution,
    OutdegreeDistribution,
    GeodesicDistribution,
    TriadCensus,
}

impl GofFamily {
    pub const ALL: [GofFamily; 4] = [
        Self::IndegreeDistribution,
        Self::OutdegreeDistribution,
        Self::GeodesicDistribution,
        Self::TriadCensus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::IndegreeDistribution => "indegree_distribution",
            Self::OutdegreeDistribution => "outdegree_distribution",
            Self::GeodesicDistribution => "geodesic_distribution",
            Self::TriadCensus => "triad_census",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            Self::IndegreeDistribution | Self::OutdegreeDistribution => {
                (0..=MAX_DEGREE).map(|k| format!("<={k}")).collect()
            }
            Self::GeodesicDistribution => (1..=MAX_GEODESIC)
                .map(|d| d.to_string())
                .chain([format!(">{MAX_GEODESIC}"), "inf".to_string()])
                .collect(),
            Self::TriadCensus => TRIAD_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl fmt::Display for GofFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn cumulative_degrees(degrees: &[usize]) -> Vec<f64> {
    (0..=MAX_DEGREE)
        .map(|k| degrees.iter().filter(|&&d| d <= k).count() as f64)
        .collect()
}

/// Counts of ordered pairs `(i, j)`, `i ≠ j`, by directed distance: `1..=5`, longer, unreachable.
pub fn geodesic_distribution(net: &DirectedNetwork) -> Vec<f64> {
    let n = net.n();
    let mut counts = vec![0.0; MAX_GEODESIC + 2];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for v in net.out_neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (t, &d) in dist.iter().enumerate() {
            if t == s {
                continue;
            }
            let bucket = match d {
                usize::MAX => MAX_GEODESIC + 1,
                d if d > MAX_GEODESIC => MAX_GEODESIC,
                d => d - 1,
            };
            counts[bucket] += 1.0;
        }
    }
    counts
}

/// Class index (into [`TRIAD_NAMES`]) of the triad on actors `v, u, w`.
pub fn triad_class(net: &DirectedNetwork, v: usize, u: usize, w: usize) -> usize {
    let bits = [(v, u, 1), (u, v, 2), (v, w, 4), (w, v, 8), (u, w, 16), (w, u, 32)];
    let code: usize = bits
        .iter()
        .filter(|(a, b, _)| net.has_tie(*a, *b))
        .map(|(_, _, x)| x)
        .sum();
    TRICODES[code] as usize - 1
}

/// Counts of unordered actor triples in each of the 16 isomorphism classes.
pub fn triad_census(net: &DirectedNetwork) -> Vec<f64> {
    let n = net.n();
    let mut census = vec![0.0; 16];
    for v in 0..n {
        for u in v + 1..n {
            for w in u + 1..n {
                census[triad_class(net, v, u, w)] += 1.0;
            }
        }
    }
    census
}

pub fn auxiliary_statistics(net: &DirectedNetwork, family: GofFamily) -> Vec<f64> {
    match family {
        GofFamily::IndegreeDistribution => cumulative_degrees(&net.degrees().inn),
        GofFamily::OutdegreeDistribution => cumulative_degrees(&net.degrees().out),
        GofFamily::GeodesicDistribution => geodesic_distribution(net),
        GofFamily::TriadCensus => triad_census(net),
    }
}

/// Mahalanobis comparison of one vector with a simulated reference sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mahalanobis {
    pub distance: f64,
    pub p_value: f64,
    /// Coordinates with zero simulated variance, left out of the distance.
    pub dropped: Vec<usize>,
    pub simulated_distances: Vec<f64>,
}

/// Distance of `observed` from the simulated mean, and the proportion of the reference set
/// (simulated vectors plus the observation) at least as far away.
pub fn mahalanobis(observed: &[f64], simulated: &[Vec<f64>]) -> Mahalanobis {
    let (mean, cov) = mean_covariance(simulated);
    let p = observed.len();
    let (kept, dropped): (Vec<usize>, Vec<usize>) = (0..p).partition(|&k| cov[(k, k)] > 0.0);
    if !dropped.is_empty() {
        log::warn!("dropping zero-variance statistics {dropped:?}");
    }
    let q = kept.len();
    let sub_cov = DMatrix::from_fn(q, q, |a, b| cov[(kept[a], kept[b])]);
    let inv = pinv_symmetric(&sub_cov);
    let dist = |x: &[f64]| {
        let d = DVector::from_iterator(q, kept.iter().map(|&k| x[k] - mean[k]));
        d.dot(&(&inv * &d)).max(0.0).sqrt()
    };
    let distance = dist(observed);
    let simulated_distances: Vec<f64> = simulated.iter().map(|x| dist(x)).collect();
    // relative slack so that ties in the underlying counts compare as ties
    let tol = 1e-9 * distance.max(1.0);
    let at_least = simulated_distances
        .iter()
        .filter(|&&d| d >= distance - tol)
        .count();
    Mahalanobis {
        distance,
        p_value: (1 + at_least) as f64 / (simulated.len() + 1) as f64,
        dropped,
        simulated_distances,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub family: GofFamily,
    pub labels: Vec<String>,
    pub observed: Vec<f64>,
    /// One row per simulation run.
    pub simulated: Vec<Vec<f64>>,
    pub mahalanobis_observed: f64,
    pub p_value: f64,
    pub dropped: Vec<usize>,
    /// Observed and mean simulated count of transitive triads (triad census only).
    pub transitive: Option<(f64, f64)>,
}

impl GofReport {
    /// Violin-plot data: `statistic_index,run,value`, with run `obs` for the observation.
    pub fn write_violin<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "statistic_index,run,value")?;
        for (r, row) in self.simulated.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                writeln!(w, "{k},{r},{v}")?;
            }
        }
        for (k, v) in self.observed.iter().enumerate() {
            writeln!(w, "{k},obs,{v}")?;
        }
        Ok(())
    }
}

/// Simulated end waves of every period for `n_sim` runs; run `r` uses its own substream.
pub fn simulate_end_waves(
    panel: &NetworkPanel,
    fitted: &MoMResult,
    n_sim: usize,
    seed: u64,
) -> Result<Vec<Vec<DirectedNetwork>>, EstimationError> {
    if fitted.n_rates != panel.n_periods() {
        return Err(EstimationError::Invalid(format!(
            "fit has {} rates for a panel with {} periods",
            fitted.n_rates,
            panel.n_periods()
        )));
    }
    let params = fitted.parameter_vector();
    let sim = Simulator::new(&params, panel.covariates(), panel.n())?;
    let waves = panel.waves();
    Ok((0..n_sim as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, GOF_STREAM + r);
            fitted
                .rates()
                .iter()
                .enumerate()
                .map(|(m, &rate)| sim.run_period(&waves[m], rate.max(0.0), 1.0, 1_000_000, &mut rng).end)
                .collect()
        })
        .collect())
}

fn summed(nets: &[DirectedNetwork], family: GofFamily) -> Vec<f64> {
    let mut tot = vec![0.0; family.labels().len()];
    for net in nets {
        tot.iter_mut()
            .zip(auxiliary_statistics(net, family))
            .for_each(|(a, b)| *a += b);
    }
    tot
}

/// Goodness of fit for several families from one batch of simulations.
pub fn gof_families(
    panel: &NetworkPanel,
    fitted: &MoMResult,
    families: &[GofFamily],
    n_sim: usize,
    seed: u64,
) -> Result<Vec<GofReport>, EstimationError> {
    if n_sim < 20 {
        return Err(EstimationError::Invalid(format!(
            "goodness of fit needs at least 20 simulations, got {n_sim}"
        )));
    }
    let sims = simulate_end_waves(panel, fitted, n_sim, seed)?;
    let observed_nets = &panel.waves()[1..];
    Ok(families
        .iter()
        .map(|&family| {
            let observed = summed(observed_nets, family);
            let simulated: Vec<Vec<f64>> =
                sims.par_iter().map(|nets| summed(nets, family)).collect();
            let m = mahalanobis(&observed, &simulated);
            let transitive = (family == GofFamily::TriadCensus).then(|| {
                let idx: Vec<usize> = TRANSITIVE_TRIADS
                    .iter()
                    .map(|t| TRIAD_NAMES.iter().position(|n| n == t).expect("known class"))
                    .collect();
                let count = |v: &[f64]| idx.iter().map(|&k| v[k]).sum::<f64>();
                let mean =
                    simulated.iter().map(|v| count(v)).sum::<f64>() / simulated.len() as f64;
                (count(&observed), mean)
            });
            GofReport {
                family,
                labels: family.labels(),
                observed,
                simulated,
                mahalanobis_observed: m.distance,
                p_value: m.p_value,
                dropped: m.dropped,
                transitive,
            }
        })
        .collect())
}

pub fn gof(
    panel: &NetworkPanel,
    fitted: &MoMResult,
    family: GofFamily,
    n_sim: usize,
    seed: u64,
) -> Result<GofReport, EstimationError> {
    Ok(gof_families(panel, fitted, &[family], n_sim, seed)?.remove(0))
}
