//! Declarative model configuration in TOML.
//!
//! ```toml
//! seed = 42
//!
//! [data]
//! waves = ["wave1.txt", "wave2.txt"]   # adjacency files, relative to this file
//! actors = "actors.txt"                # optional, one label per line
//!
//! [[covariate]]
//! name = "grade"
//! file = "grade.csv"                   # actor_id,value
//! centered = true
//! range = [20.0, 30.0]                 # optional, raw units; data range otherwise
//!
//! [[effect]]
//! name = "density"
//! value = -2.0                         # used by `simulate` and as a starting value
//!
//! [[effect]]
//! name = "quadratic(grade)"            # diffSqX, altSqX, altX, egoX, egoSqX on grade
//! values = [-0.03, -0.003, 0.04, -0.1, 0.03]
//!
//! [[effect]]
//! name = "gwespFF"
//! alpha = 0.693
//!
//! [rates]
//! values = [5.0]
//!
//! [estimation]                          # any MomOptions field
//! phase3_runs = 1000
//!
//! [simulation]
//! periods = 1
//!
//! [gof]
//! n_sim = 200
//! families = ["indegree_distribution", "triad_census"]
//!
//! [analysis]
//! covariate = "grade"
//! theta = [-0.0288, -0.003, 0.044, -0.095, 0.026]  # or `fit = "fit.json"`
//! std_errors = [0.0073, 0.0025, 0.018, 0.03, 0.009]
//! range = [-6.0, 4.0]                   # analysis scale; from the covariate otherwise
//! mean = 0.0
//! ego_values = [-6.0, -2.0, 0.0, 4.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::effects::{EffectKind, EffectSpec};
use crate::error::{ConfigError, IngestError};
use crate::estimation::MomOptions;
use crate::gof::GofFamily;
use crate::io;
use crate::network::{default_labels, ActorCovariate, Covariates, DirectedNetwork, NetworkPanel};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default, rename = "covariate")]
    pub covariates: Vec<CovariateConfig>,
    #[serde(default, rename = "effect")]
    pub effects: Vec<EffectConfig>,
    pub rates: Option<RatesConfig>,
    #[serde(default)]
    pub estimation: MomOptions,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub gof: GofConfig,
    pub analysis: Option<AnalysisConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default)]
    pub waves: Vec<PathBuf>,
    pub actors: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateConfig {
    pub name: String,
    pub file: PathBuf,
    #[serde(default)]
    pub centered: bool,
    pub range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectConfig {
    pub name: String,
    pub covariate: Option<String>,
    pub alpha: Option<f64>,
    pub value: Option<f64>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    /// Defaults to the number of rates.
    pub periods: Option<usize>,
    pub period_length: f64,
    pub max_events: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            periods: None,
            period_length: 1.0,
            max_events: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GofConfig {
    pub n_sim: usize,
    pub families: Vec<GofFamily>,
    /// Fitted model to test; estimated first when absent.
    pub fit: Option<PathBuf>,
}

impl Default for GofConfig {
    fn default() -> Self {
        Self {
            n_sim: 200,
            families: GofFamily::ALL.to_vec(),
            fit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub covariate: String,
    pub theta: Option<[f64; 5]>,
    pub fit: Option<PathBuf>,
    pub std_errors: Option<[f64; 5]>,
    pub covariance: Option<[[f64; 5]; 5]>,
    pub range: Option<[f64; 2]>,
    pub mean: Option<f64>,
    pub ego_values: Option<Vec<f64>>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    0.05
}

/// Effect list with optional values, after expanding shorthands.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedEffects {
    pub effects: Vec<EffectSpec>,
    pub values: Vec<Option<f64>>,
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Expands `quadratic(V)` and `shortName(V)` forms into effect specifications.
    pub fn resolve_effects(&self) -> Result<ResolvedEffects, ConfigError> {
        let mut effects = Vec::new();
        let mut values = Vec::new();
        for e in &self.effects {
            let (head, arg) = split_call(&e.name)?;
            let covariate = match (arg, &e.covariate) {
                (Some(a), Some(c)) if a != c => {
                    return Err(ConfigError::Invalid(format!(
                        "effect {:?} names covariate {a:?} and {c:?}",
                        e.name
                    )))
                }
                (Some(a), _) => Some(a.to_string()),
                (None, c) => c.clone(),
            };
            if head == "quadratic" {
                let cov = covariate.ok_or_else(|| {
                    ConfigError::Invalid("quadratic(...) needs a covariate".into())
                })?;
                if e.value.is_some() || e.alpha.is_some() {
                    return Err(ConfigError::Invalid(
                        "quadratic(...) takes `values` (five numbers), not `value` or `alpha`".into(),
                    ));
                }
                let vals = match &e.values {
                    Some(v) if v.len() == 5 => v.iter().map(|x| Some(*x)).collect(),
                    Some(v) => {
                        return Err(ConfigError::Invalid(format!(
                            "quadratic({cov}) takes 5 values, got {}",
                            v.len()
                        )))
                    }
                    None => vec![None; 5],
                };
                effects.extend(EffectSpec::quadratic(&cov));
                values.extend::<Vec<Option<f64>>>(vals);
                continue;
            }
            if e.values.is_some() {
                return Err(ConfigError::Invalid(format!(
                    "effect {:?} takes a single `value`",
                    e.name
                )));
            }
            let kind = EffectKind::from_name(head)?;
            effects.push(EffectSpec::new(kind, covariate, e.alpha)?);
            values.push(e.value);
        }
        Ok(ResolvedEffects { effects, values })
    }

    pub fn seed(&self, cli_seed: Option<u64>) -> u64 {
        cli_seed.or(self.seed).unwrap_or(1)
    }
}

fn split_call(name: &str) -> Result<(&str, Option<&str>), ConfigError> {
    let name = name.trim();
    match name.find('(') {
        None => Ok((name, None)),
        Some(k) if name.ends_with(')') => {
            let arg = name[k + 1..name.len() - 1].trim();
            if arg.is_empty() {
                return Err(ConfigError::Invalid(format!("effect {name:?} has an empty argument")));
            }
            Ok((name[..k].trim(), Some(arg)))
        }
        Some(_) => Err(ConfigError::Invalid(format!("malformed effect name {name:?}"))),
    }
}

/// Failure while reading the data named in a configuration.
#[derive(Debug, thiserror::Error)]
pub enum IngestFailure {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Reads waves, actor labels and covariates; `min_waves` is 2 for estimation and 1 for
/// simulation from a start network.
pub fn ingest(
    config: &ModelConfig,
    base_dir: &Path,
    min_waves: usize,
) -> Result<NetworkPanel, IngestFailure> {
    if config.data.waves.len() < min_waves {
        return Err(ConfigError::Invalid(format!(
            "need at least {min_waves} wave files, got {}",
            config.data.waves.len()
        ))
        .into());
    }
    let mut waves: Vec<DirectedNetwork> = Vec::new();
    for p in &config.data.waves {
        let path = resolve(base_dir, p);
        let net = io::read_adjacency(&path)?;
        if let Some(first) = waves.first() {
            if first.n() != net.n() {
                return Err(IngestError::Invalid {
                    path,
                    msg: format!("{} actors, first wave has {}", net.n(), first.n()),
                }
                .into());
            }
        }
        waves.push(net);
    }
    let n = waves[0].n();
    let labels = match &config.data.actors {
        Some(p) => {
            let path = resolve(base_dir, p);
            let l = io::read_actor_labels(&path)?;
            if l.len() != n {
                return Err(IngestError::Invalid {
                    path,
                    msg: format!("{} actor labels for {n} actors", l.len()),
                }
                .into());
            }
            l
        }
        None => default_labels(n),
    };
    let mut covs = Covariates::new();
    for c in &config.covariates {
        let path = resolve(base_dir, &c.file);
        let raw = io::read_covariate(&path, &labels)?;
        let cov = ActorCovariate::new(&c.name, raw, c.centered, c.range.map(|[a, b]| (a, b)))
            .map_err(|e| IngestError::Invalid {
                path: path.clone(),
                msg: e.to_string(),
            })?;
        covs.insert(cov);
    }
    NetworkPanel::new(waves, covs, labels)
        .map_err(|e| ConfigError::Invalid(e.to_string()).into())
}
