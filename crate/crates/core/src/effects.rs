//! Effect statistics `s_ki(x, v)`, the evaluation function `f_i = Σ_k β_k s_ki`, and
//! change scores for single tie toggles.
//!
//! Statistics are ego-wise: each is a sum over the outgoing tie variables of actor `i`.
//! Wave-level totals (used as estimation targets) are sums over egos.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::EffectError;
use crate::network::{Covariates, DirectedNetwork, SharedPartners};

/// Default gwesp decay `α = ln 2`.
pub const DEFAULT_GWESP_ALPHA: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    Outdegree,
    Reciprocity,
    Gwesp,
    ReciprocityGwesp,
    IndegreePopularity,
    OutdegreePopularity,
    OutdegreeActivity,
    CovEgo,
    CovAlter,
    CovAlterSq,
    CovEgoSq,
    CovDiffSq,
    CovEgoXAlter,
    CovSame,
}

impl EffectKind {
    pub const ALL: [EffectKind; 14] = [
        Self::Outdegree,
        Self::Reciprocity,
        Self::Gwesp,
        Self::ReciprocityGwesp,
        Self::IndegreePopularity,
        Self::OutdegreePopularity,
        Self::OutdegreeActivity,
        Self::CovEgo,
        Self::CovAlter,
        Self::CovAlterSq,
        Self::CovEgoSq,
        Self::CovDiffSq,
        Self::CovEgoXAlter,
        Self::CovSame,
    ];

    /// Name used in model configuration files.
    pub fn short_name(&self) -> &'static str {
        match self {
            Self::Outdegree => "density",
            Self::Reciprocity => "recip",
            Self::Gwesp => "gwespFF",
            Self::ReciprocityGwesp => "recipGwespFF",
            Self::IndegreePopularity => "inPop",
            Self::OutdegreePopularity => "outPop",
            Self::OutdegreeActivity => "outAct",
            Self::CovEgo => "egoX",
            Self::CovAlter => "altX",
            Self::CovAlterSq => "altSqX",
            Self::CovEgoSq => "egoSqX",
            Self::CovDiffSq => "diffSqX",
            Self::CovEgoXAlter => "egoXaltX",
            Self::CovSame => "sameX",
        }
    }

    /// Accepts short names and the long snake_case names.
    pub fn from_name(name: &str) -> Result<Self, EffectError> {
        let kind = match name {
            "density" | "outdegree" => Self::Outdegree,
            "recip" | "reciprocity" => Self::Reciprocity,
            "gwespFF" | "gwesp" | "transTrip_gwesp" => Self::Gwesp,
            "recipGwespFF" | "reciprocity_gwesp" => Self::ReciprocityGwesp,
            "inPop" | "indegree_popularity" => Self::IndegreePopularity,
            "outPop" | "outdegree_popularity" => Self::OutdegreePopularity,
            "outAct" | "outdegree_activity" => Self::OutdegreeActivity,
            "egoX" | "cov_ego" => Self::CovEgo,
            "altX" | "cov_alter" => Self::CovAlter,
            "altSqX" | "cov_alter_sq" => Self::CovAlterSq,
            "egoSqX" | "cov_ego_sq" => Self::CovEgoSq,
            "diffSqX" | "cov_diff_sq" => Self::CovDiffSq,
            "egoXaltX" | "cov_ego_x_alter" => Self::CovEgoXAlter,
            "sameX" | "cov_same" => Self::CovSame,
            other => return Err(EffectError::UnknownEffect(other.to_string())),
        };
        Ok(kind)
    }

    pub fn needs_covariate(&self) -> bool {
        matches!(
            self,
            Self::CovEgo
                | Self::CovAlter
                | Self::CovAlterSq
                | Self::CovEgoSq
                | Self::CovDiffSq
                | Self::CovEgoXAlter
                | Self::CovSame
        )
    }

    pub fn is_gwesp(&self) -> bool {
        matches!(self, Self::Gwesp | Self::ReciprocityGwesp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSpec {
    pub kind: EffectKind,
    pub covariate: Option<String>,
    pub alpha: Option<f64>,
}

impl EffectSpec {
    pub fn structural(kind: EffectKind) -> Result<Self, EffectError> {
        Self::new(kind, None, None)
    }

    pub fn covariate(kind: EffectKind, name: impl Into<String>) -> Result<Self, EffectError> {
        Self::new(kind, Some(name.into()), None)
    }

    pub fn gwesp(kind: EffectKind, alpha: f64) -> Result<Self, EffectError> {
        Self::new(kind, None, Some(alpha))
    }

    pub fn new(
        kind: EffectKind,
        covariate: Option<String>,
        alpha: Option<f64>,
    ) -> Result<Self, EffectError> {
        match (&covariate, kind.needs_covariate()) {
            (None, true) => {
                return Err(EffectError::MissingCovariate {
                    effect: kind.short_name().into(),
                })
            }
            (Some(c), false) => {
                return Err(EffectError::UnexpectedCovariate {
                    effect: kind.short_name().into(),
                    covariate: c.clone(),
                })
            }
            _ => {}
        }
        let alpha = if kind.is_gwesp() {
            let a = alpha.unwrap_or(DEFAULT_GWESP_ALPHA);
            if !(a > 0.0 && a.is_finite()) {
                return Err(EffectError::InvalidAlpha(a));
            }
            Some(a)
        } else {
            None
        };
        Ok(Self { kind, covariate, alpha })
    }

    /// The five quadratic-model effects on one covariate, in θ order:
    /// diffSqX, altSqX, altX, egoX, egoSqX.
    pub fn quadratic(covariate: &str) -> Vec<EffectSpec> {
        [
            EffectKind::CovDiffSq,
            EffectKind::CovAlterSq,
            EffectKind::CovAlter,
            EffectKind::CovEgo,
            EffectKind::CovEgoSq,
        ]
        .into_iter()
        .map(|k| EffectSpec::covariate(k, covariate).expect("covariate kind"))
        .collect()
    }
}

impl fmt::Display for EffectSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.covariate, self.alpha) {
            (Some(c), _) => write!(f, "{}({c})", self.kind.short_name()),
            (None, Some(a)) if (a - DEFAULT_GWESP_ALPHA).abs() > 1e-12 => {
                write!(f, "{}(alpha={a})", self.kind.short_name())
            }
            _ => f.write_str(self.kind.short_name()),
        }
    }
}

/// Effects and their weights in the evaluation function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub effects: Vec<EffectSpec>,
    pub beta: Vec<f64>,
}

impl ParameterVector {
    pub fn new(effects: Vec<EffectSpec>, beta: Vec<f64>) -> Result<Self, EffectError> {
        if effects.len() != beta.len() {
            return Err(EffectError::LengthMismatch {
                effects: effects.len(),
                betas: beta.len(),
            });
        }
        Ok(Self { effects, beta })
    }

    pub fn zeros(effects: Vec<EffectSpec>) -> Self {
        let beta = vec![0.0; effects.len()];
        Self { effects, beta }
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }
}

#[inline]
fn gwesp_weight(alpha: f64, sp: u32) -> f64 {
    alpha.exp() * (1.0 - (1.0 - (-alpha).exp()).powi(sp as i32))
}

/// Per-tie gwesp contribution `e^α (1 − (1 − e^{−α})^sp)`.
pub fn gwesp_contribution(alpha: f64, shared_partners: usize) -> f64 {
    gwesp_weight(alpha, shared_partners as u32)
}

#[derive(Debug, Clone)]
enum Term<'a> {
    Outdegree,
    Reciprocity,
    Gwesp(Vec<f64>),
    ReciprocityGwesp(Vec<f64>),
    InPop,
    OutPop,
    OutAct,
    Dyadic(EffectKind, &'a [f64]),
}

/// Effects bound to a covariate collection, ready for repeated evaluation on networks of
/// `n` actors.
#[derive(Debug, Clone)]
pub struct BoundEffects<'a> {
    terms: Vec<Term<'a>>,
    n: usize,
    needs_sp: bool,
}

/// Cached network summaries used by change-score computation.
#[derive(Debug, Clone)]
pub struct NetworkCache {
    pub sp: SharedPartners,
    pub out_deg: Vec<usize>,
    pub in_deg: Vec<usize>,
}

impl NetworkCache {
    pub fn new(net: &DirectedNetwork) -> Self {
        let d = net.degrees();
        Self {
            sp: SharedPartners::from_network(net),
            out_deg: d.out,
            in_deg: d.inn,
        }
    }

    /// Update after `(i, j)` has been toggled in `net`.
    pub fn apply_toggle(&mut self, net: &DirectedNetwork, i: usize, j: usize) {
        if i == j {
            return;
        }
        if net.has_tie(i, j) {
            self.out_deg[i] += 1;
            self.in_deg[j] += 1;
        } else {
            self.out_deg[i] -= 1;
            self.in_deg[j] -= 1;
        }
        self.sp.apply_toggle(net, i, j);
    }
}

#[inline]
fn dyadic(kind: EffectKind, v: &[f64], i: usize, j: usize) -> f64 {
    let (a, b) = (v[i], v[j]);
    match kind {
        EffectKind::CovEgo => a,
        EffectKind::CovAlter => b,
        EffectKind::CovAlterSq => b * b,
        EffectKind::CovEgoSq => a * a,
        EffectKind::CovDiffSq => (a - b) * (a - b),
        EffectKind::CovEgoXAlter => a * b,
        EffectKind::CovSame => {
            if a == b {
                1.0
            } else {
                0.0
            }
        }
        _ => unreachable!("not a covariate effect"),
    }
}

impl<'a> BoundEffects<'a> {
    pub fn new(
        effects: &[EffectSpec],
        covs: &'a Covariates,
        n: usize,
    ) -> Result<Self, EffectError> {
        let mut terms = Vec::with_capacity(effects.len());
        for e in effects {
            let t = match e.kind {
                EffectKind::Outdegree => Term::Outdegree,
                EffectKind::Reciprocity => Term::Reciprocity,
                EffectKind::Gwesp | EffectKind::ReciprocityGwesp => {
                    let alpha = e.alpha.unwrap_or(DEFAULT_GWESP_ALPHA);
                    let table = (0..=n as u32).map(|s| gwesp_weight(alpha, s)).collect();
                    if e.kind == EffectKind::Gwesp {
                        Term::Gwesp(table)
                    } else {
                        Term::ReciprocityGwesp(table)
                    }
                }
                EffectKind::IndegreePopularity => Term::InPop,
                EffectKind::OutdegreePopularity => Term::OutPop,
                EffectKind::OutdegreeActivity => Term::OutAct,
                kind => {
                    let name = e.covariate.as_deref().ok_or_else(|| {
                        EffectError::MissingCovariate {
                            effect: kind.short_name().into(),
                        }
                    })?;
                    let cov = covs
                        .get(name)
                        .ok_or_else(|| EffectError::UnknownCovariate(name.to_string()))?;
                    if cov.len() != n {
                        return Err(EffectError::UnknownCovariate(format!(
                            "{name} (has {} values for {n} actors)",
                            cov.len()
                        )));
                    }
                    Term::Dyadic(kind, cov.values())
                }
            };
            terms.push(t);
        }
        let needs_sp = terms
            .iter()
            .any(|t| matches!(t, Term::Gwesp(_) | Term::ReciprocityGwesp(_)));
        Ok(Self { terms, n, needs_sp })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// All statistics of actor `i`, computed directly from the network.
    pub fn actor_statistics(&self, net: &DirectedNetwork, i: usize, out: &mut [f64]) {
        let n = net.n();
        for (k, t) in self.terms.iter().enumerate() {
            let mut s = 0.0;
            for j in net.out_neighbors(i) {
                s += match t {
                    Term::Outdegree => 1.0,
                    Term::Reciprocity => net.tie(j, i),
                    Term::Gwesp(w) => w[net.shared_partners(i, j)],
                    Term::ReciprocityGwesp(w) => net.tie(j, i) * w[net.shared_partners(i, j)],
                    Term::InPop => net.in_degree(j) as f64,
                    Term::OutPop => net.out_degree(j) as f64,
                    Term::OutAct => 0.0,
                    Term::Dyadic(kind, v) => dyadic(*kind, v, i, j),
                };
            }
            if let Term::OutAct = t {
                let d = net.out_degree(i) as f64;
                s = d * d;
            }
            debug_assert!(n == self.n);
            out[k] = s;
        }
    }

    /// Wave totals `Σ_i s_ki(x)`.
    pub fn totals(&self, net: &DirectedNetwork) -> Vec<f64> {
        let mut tot = vec![0.0; self.len()];
        let mut buf = vec![0.0; self.len()];
        for i in 0..net.n() {
            self.actor_statistics(net, i, &mut buf);
            tot.iter_mut().zip(&buf).for_each(|(t, b)| *t += b);
        }
        tot
    }

    /// Change statistics for toggling `(i, j)`, written into `out` (one entry per effect).
    /// Zero when `i == j`.
    pub fn change_statistics(
        &self,
        net: &DirectedNetwork,
        cache: &NetworkCache,
        i: usize,
        j: usize,
        out: &mut [f64],
    ) {
        if i == j {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        let adding = !net.has_tie(i, j);
        let d = if adding { 1.0 } else { -1.0 };
        for (k, t) in self.terms.iter().enumerate() {
            out[k] = match t {
                Term::Outdegree => d,
                Term::Reciprocity => d * net.tie(j, i),
                Term::Gwesp(w) => {
                    let mut c = d * w[cache.sp.get(i, j) as usize];
                    // ties i -> h whose shared-partner count changes through j
                    for h in net.out_neighbors(i) {
                        if net.has_tie(j, h) {
                            let s = cache.sp.get(i, h) as usize;
                            let s2 = if adding { s + 1 } else { s - 1 };
                            c += w[s2] - w[s];
                        }
                    }
                    c
                }
                Term::ReciprocityGwesp(w) => {
                    let mut c = d * net.tie(j, i) * w[cache.sp.get(i, j) as usize];
                    for h in net.out_neighbors(i) {
                        if net.has_tie(j, h) && net.has_tie(h, i) {
                            let s = cache.sp.get(i, h) as usize;
                            let s2 = if adding { s + 1 } else { s - 1 };
                            c += w[s2] - w[s];
                        }
                    }
                    c
                }
                Term::InPop => {
                    let indeg = cache.in_deg[j] as f64;
                    if adding {
                        indeg + 1.0
                    } else {
                        -indeg
                    }
                }
                Term::OutPop => d * cache.out_deg[j] as f64,
                Term::OutAct => {
                    let k0 = cache.out_deg[i] as f64;
                    (k0 + d) * (k0 + d) - k0 * k0
                }
                Term::Dyadic(kind, v) => d * dyadic(*kind, v, i, j),
            };
        }
    }

    /// `f_i(x^{±ij}) − f_i(x)` for every `j`, written into `out` (length `n`).
    pub fn change_scores_into(
        &self,
        beta: &[f64],
        net: &DirectedNetwork,
        cache: &NetworkCache,
        i: usize,
        out: &mut [f64],
        scratch: &mut [f64],
    ) {
        for j in 0..net.n() {
            if j == i {
                out[j] = 0.0;
                continue;
            }
            self.change_statistics(net, cache, i, j, scratch);
            out[j] = beta.iter().zip(scratch.iter()).map(|(b, s)| b * s).sum();
        }
    }

    pub fn needs_shared_partners(&self) -> bool {
        self.needs_sp
    }
}

/// `s_ki(x, v)` for one effect and one actor.
pub fn statistic(
    spec: &EffectSpec,
    net: &DirectedNetwork,
    covs: &Covariates,
    i: usize,
) -> Result<f64, EffectError> {
    let bound = BoundEffects::new(std::slice::from_ref(spec), covs, net.n())?;
    let mut out = [0.0];
    bound.actor_statistics(net, i, &mut out);
    Ok(out[0])
}

/// `f_i(x, v, β) = Σ_k β_k s_ki(x, v)`.
pub fn evaluation_function(
    params: &ParameterVector,
    net: &DirectedNetwork,
    covs: &Covariates,
    i: usize,
) -> Result<f64, EffectError> {
    let bound = BoundEffects::new(&params.effects, covs, net.n())?;
    let mut s = vec![0.0; bound.len()];
    bound.actor_statistics(net, i, &mut s);
    Ok(params.beta.iter().zip(&s).map(|(b, s)| b * s).sum())
}

/// Evaluation-function differences `f_i(x^{±ij}) − f_i(x)` for all targets `j`.
pub fn change_scores(
    params: &ParameterVector,
    net: &DirectedNetwork,
    covs: &Covariates,
    i: usize,
) -> Result<Vec<f64>, EffectError> {
    let bound = BoundEffects::new(&params.effects, covs, net.n())?;
    let cache = NetworkCache::new(net);
    let mut out = vec![0.0; net.n()];
    let mut scratch = vec![0.0; bound.len()];
    bound.change_scores_into(&params.beta, net, &cache, i, &mut out, &mut scratch);
    Ok(out)
}

/// Wave totals of each effect statistic.
pub fn wave_totals(
    effects: &[EffectSpec],
    net: &DirectedNetwork,
    covs: &Covariates,
) -> Result<Vec<f64>, EffectError> {
    Ok(BoundEffects::new(effects, covs, net.n())?.totals(net))
}
