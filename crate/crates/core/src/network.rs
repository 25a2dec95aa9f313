//! Directed binary networks, actor covariates and multi-wave panels.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::NetworkError;

/// A directed binary network over `n` actors without self-ties.
///
/// Ties are stored densely in row-major order; `ties[i * n + j]` is the
/// indicator for the tie `i -> j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirectedNetwork {
    n: usize,
    ties: Vec<bool>,
}

impl DirectedNetwork {
    pub fn empty(n: usize) -> Result<Self, NetworkError> {
        if n < 2 {
            return Err(NetworkError::TooFewActors(n));
        }
        Ok(Self {
            n,
            ties: vec![false; n * n],
        })
    }

    /// Builds a network from a row-major indicator vector. Diagonal entries must be `false`.
    pub fn from_ties(n: usize, ties: Vec<bool>) -> Result<Self, NetworkError> {
        if n < 2 {
            return Err(NetworkError::TooFewActors(n));
        }
        if ties.len() != n * n {
            return Err(NetworkError::ShapeMismatch {
                expected: n * n,
                got: ties.len(),
            });
        }
        if let Some(i) = (0..n).find(|&i| ties[i * n + i]) {
            return Err(NetworkError::SelfTie(i));
        }
        Ok(Self { n, ties })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, NetworkError> {
        let mut net = Self::empty(n)?;
        for &(i, j) in edges {
            net.check(i, j)?;
            if i == j {
                return Err(NetworkError::SelfTie(i));
            }
            net.ties[i * n + j] = true;
        }
        Ok(net)
    }

    pub fn complete(n: usize) -> Result<Self, NetworkError> {
        let mut net = Self::empty(n)?;
        for i in 0..n {
            for j in 0..n {
                net.ties[i * n + j] = i != j;
            }
        }
        Ok(net)
    }

    /// Each off-diagonal tie present independently with probability `p`.
    pub fn bernoulli<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self, NetworkError> {
        let mut net = Self::empty(n)?;
        for i in 0..n {
            for j in 0..n {
                net.ties[i * n + j] = i != j && rng.random::<f64>() < p;
            }
        }
        Ok(net)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_tie(&self, i: usize, j: usize) -> bool {
        self.ties[i * self.n + j]
    }

    #[inline]
    pub(crate) fn tie(&self, i: usize, j: usize) -> f64 {
        if self.ties[i * self.n + j] {
            1.0
        } else {
            0.0
        }
    }

    fn check(&self, i: usize, j: usize) -> Result<(), NetworkError> {
        if i >= self.n || j >= self.n {
            Err(NetworkError::IndexOutOfRange { i, j, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Returns `x^{±ij}`: the network with tie variable `(i, j)` flipped.
    /// For `i == j` the network is returned unchanged.
    pub fn toggle(&self, i: usize, j: usize) -> Result<Self, NetworkError> {
        let mut out = self.clone();
        out.toggle_mut(i, j)?;
        Ok(out)
    }

    /// In-place variant of [`toggle`](Self::toggle). Returns whether a tie was flipped.
    pub fn toggle_mut(&mut self, i: usize, j: usize) -> Result<bool, NetworkError> {
        self.check(i, j)?;
        if i == j {
            return Ok(false);
        }
        let k = i * self.n + j;
        self.ties[k] = !self.ties[k];
        Ok(true)
    }

    pub fn tie_count(&self) -> usize {
        self.ties.iter().filter(|&&t| t).count()
    }

    pub fn density(&self) -> f64 {
        self.tie_count() as f64 / (self.n * (self.n - 1)) as f64
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&t| t).count()
    }

    pub fn in_degree(&self, j: usize) -> usize {
        (0..self.n).filter(|&i| self.has_tie(i, j)).count()
    }

    /// Out- and indegrees of all actors.
    pub fn degrees(&self) -> Degrees {
        let mut out = vec![0usize; self.n];
        let mut inn = vec![0usize; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                if self.has_tie(i, j) {
                    out[i] += 1;
                    inn[j] += 1;
                }
            }
        }
        Degrees { out, inn }
    }

    /// Number of two-paths `i -> h -> j`; zero on the diagonal.
    pub fn shared_partners(&self, i: usize, j: usize) -> usize {
        if i == j {
            return 0;
        }
        (0..self.n)
            .filter(|&h| self.has_tie(i, h) && self.has_tie(h, j))
            .count()
    }

    /// Number of tie variables in which the two networks differ.
    pub fn hamming(&self, other: &Self) -> usize {
        assert_eq!(self.n, other.n, "hamming distance between networks of different size");
        self.ties
            .iter()
            .zip(&other.ties)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.ties[i * self.n..(i + 1) * self.n]
    }

    pub fn out_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i)
            .iter()
            .enumerate()
            .filter_map(|(j, &t)| t.then_some(j))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.out_neighbors(i).map(move |j| (i, j)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Degrees {
    pub out: Vec<usize>,
    pub inn: Vec<usize>,
}

/// Two-path counts `sp_ij`, maintained incrementally under toggles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedPartners {
    n: usize,
    counts: Vec<u32>,
}

impl SharedPartners {
    pub fn from_network(net: &DirectedNetwork) -> Self {
        let n = net.n();
        let mut counts = vec![0u32; n * n];
        for i in 0..n {
            for h in net.out_neighbors(i) {
                for j in net.out_neighbors(h) {
                    counts[i * n + j] += 1;
                }
            }
        }
        Self { n, counts }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        if i == j {
            0
        } else {
            self.counts[i * self.n + j]
        }
    }

    /// Updates the counts for a toggle of `(i, j)` that has already been applied to `net`.
    pub fn apply_toggle(&mut self, net: &DirectedNetwork, i: usize, j: usize) {
        if i == j {
            return;
        }
        let n = self.n;
        let added = net.has_tie(i, j);
        for h in 0..n {
            // i -> j -> h
            if net.has_tie(j, h) {
                let c = &mut self.counts[i * n + h];
                if added {
                    *c += 1
                } else {
                    *c -= 1
                }
            }
            // h -> i -> j
            if net.has_tie(h, i) {
                let c = &mut self.counts[h * n + j];
                if added {
                    *c += 1
                } else {
                    *c -= 1
                }
            }
        }
    }
}

/// Numeric actor attribute on its analysis scale (centered when requested).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCovariate {
    pub name: String,
    values: Vec<f64>,
    centered: bool,
    /// Mean on the analysis scale: 0 for centered covariates.
    mean: f64,
    /// Mean of the raw values before centering.
    raw_mean: f64,
    range_min: f64,
    range_max: f64,
}

impl ActorCovariate {
    /// Builds a covariate from raw values. A declared range is given in raw units and must
    /// contain all values; otherwise the range is taken from the data.
    pub fn new(
        name: impl Into<String>,
        raw: Vec<f64>,
        centered: bool,
        declared_range: Option<(f64, f64)>,
    ) -> Result<Self, NetworkError> {
        let name = name.into();
        let err = |reason: String| NetworkError::Covariate {
            name: name.clone(),
            reason,
        };
        if raw.is_empty() {
            return Err(err("no values".into()));
        }
        if let Some(k) = raw.iter().position(|v| !v.is_finite()) {
            return Err(err(format!("value for actor {k} is not finite")));
        }
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            return Err(err(format!("constant covariate (all values {lo})")));
        }
        let (rmin, rmax) = match declared_range {
            Some((a, b)) => {
                if !(a < b) {
                    return Err(err(format!("declared range [{a}, {b}] is empty")));
                }
                if lo < a || hi > b {
                    return Err(err(format!(
                        "declared range [{a}, {b}] does not contain data range [{lo}, {hi}]"
                    )));
                }
                (a, b)
            }
            None => (lo, hi),
        };
        let raw_mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let shift = if centered { raw_mean } else { 0.0 };
        let mut values: Vec<f64> = raw.iter().map(|v| v - shift).collect();
        let mean = if centered {
            // remove residual rounding so the stored mean is 0 to machine precision
            let resid = values.iter().sum::<f64>() / values.len() as f64;
            values.iter_mut().for_each(|v| *v -= resid);
            0.0
        } else {
            raw_mean
        };
        Ok(Self {
            name,
            values,
            centered,
            mean,
            raw_mean,
            range_min: rmin - shift,
            range_max: rmax - shift,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn raw_mean(&self) -> f64 {
        self.raw_mean
    }

    pub fn range_min(&self) -> f64 {
        self.range_min
    }

    pub fn range_max(&self) -> f64 {
        self.range_max
    }

    /// Maps a raw-unit value onto the analysis scale.
    pub fn to_analysis_scale(&self, raw: f64) -> f64 {
        if self.centered {
            raw - self.raw_mean
        } else {
            raw
        }
    }
}

/// Named covariates in a fixed order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Covariates {
    items: Vec<ActorCovariate>,
}

impl Covariates {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces a covariate by name.
    pub fn insert(&mut self, cov: ActorCovariate) {
        match self.items.iter_mut().find(|c| c.name == cov.name) {
            Some(slot) => *slot = cov,
            None => self.items.push(cov),
        }
    }

    pub fn with(mut self, cov: ActorCovariate) -> Self {
        self.insert(cov);
        self
    }

    pub fn get(&self, name: &str) -> Option<&ActorCovariate> {
        self.items.iter().find(|c| c.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActorCovariate> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Observed network waves on a common actor set, with actor covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkPanel {
    waves: Vec<DirectedNetwork>,
    covariates: Covariates,
    actor_labels: Vec<String>,
}

impl NetworkPanel {
    pub fn new(
        waves: Vec<DirectedNetwork>,
        covariates: Covariates,
        actor_labels: Vec<String>,
    ) -> Result<Self, NetworkError> {
        let Some(first) = waves.first() else {
            return Err(NetworkError::Panel("no waves".into()));
        };
        let n = first.n();
        if let Some(k) = waves.iter().position(|w| w.n() != n) {
            return Err(NetworkError::Panel(format!(
                "wave {} has {} actors, wave 1 has {n}",
                k + 1,
                waves[k].n()
            )));
        }
        if actor_labels.len() != n {
            return Err(NetworkError::Panel(format!(
                "{} actor labels for {n} actors",
                actor_labels.len()
            )));
        }
        if let Some(c) = covariates.iter().find(|c| c.len() != n) {
            return Err(NetworkError::Panel(format!(
                "covariate `{}` has {} values for {n} actors",
                c.name,
                c.len()
            )));
        }
        Ok(Self {
            waves,
            covariates,
            actor_labels,
        })
    }

    /// Panel with actors labelled `1..=n`.
    pub fn with_default_labels(
        waves: Vec<DirectedNetwork>,
        covariates: Covariates,
    ) -> Result<Self, NetworkError> {
        let n = waves.first().map(|w| w.n()).unwrap_or(0);
        Self::new(waves, covariates, default_labels(n))
    }

    pub fn n(&self) -> usize {
        self.waves[0].n()
    }

    pub fn waves(&self) -> &[DirectedNetwork] {
        &self.waves
    }

    pub fn n_periods(&self) -> usize {
        self.waves.len().saturating_sub(1)
    }

    pub fn covariates(&self) -> &Covariates {
        &self.covariates
    }

    pub fn actor_labels(&self) -> &[String] {
        &self.actor_labels
    }
}

pub fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|k| k.to_string()).collect()
}
