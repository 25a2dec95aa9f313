//! Command-line front end: `simulate`, `estimate`, `analyze-selection`, `gof` and `report`.
//!
//! Every command reads a model configuration (see [`crate::config`]) and writes its outputs
//! into the `--out` directory. Exit codes: 0 success, 2 ingestion error, 3 estimation did
//! not converge, 4 configuration error, 1 anything else.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{ingest, IngestFailure, ModelConfig};
use crate::error::{ConfigError, EstimationError, IngestError, SimError};
use crate::estimation::{estimate, MoMResult};
use crate::gof::{gof_families, GofReport};
use crate::inference::t_test;
use crate::io;
use crate::network::{Covariates, NetworkPanel};
use crate::report::{analyze_selection, SelectionInput, SelectionReport};
use crate::selection::CovariateScale;
use crate::sim::{simulate_panel, RateParameters, SimOptions};
use crate::effects::ParameterVector;

#[derive(Debug, Parser)]
#[command(name = "saomq", version, about = "Quadratic selection functions in stochastic actor-oriented models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate waves from the first observed wave with the configured parameter values.
    Simulate(CommonArgs),
    /// Estimate rate and effect parameters.
    Estimate(CommonArgs),
    /// Interpret the quadratic selection function of one covariate.
    AnalyzeSelection(CommonArgs),
    /// Goodness of fit of a fitted model on auxiliary statistics.
    Gof(CommonArgs),
    /// Estimate, test goodness of fit and interpret the selection function in one run.
    Report(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    #[arg(long, value_name = "N", default_value_t = 101)]
    pub grid_resolution: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("estimation did not converge (maximum convergence ratio {0:.3}); results written")]
    NotConverged(f64),
    #[error("{path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<IngestFailure> for CliError {
    fn from(e: IngestFailure) -> Self {
        match e {
            IngestFailure::Ingest(e) => Self::Ingest(e),
            IngestFailure::Config(e) => Self::Config(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Ingest(_) => 2,
            Self::NotConverged(_) => 3,
            Self::Config(_) => 4,
            Self::Estimation(
                EstimationError::SingularDerivative { .. } | EstimationError::Invalid(_),
            ) => 4,
            Self::Estimation(EstimationError::Effect(_)) | Self::Sim(SimError::Effect(_)) => 4,
            _ => 1,
        }
    }
}

struct Context {
    config: ModelConfig,
    base: PathBuf,
    seed: u64,
    out: PathBuf,
    grid_resolution: usize,
}

impl Context {
    fn new(args: &CommonArgs) -> Result<Self, CliError> {
        if let Some(t) = args.threads {
            // fails only if a pool already exists, which then keeps its size
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
        let config = ModelConfig::load(&args.config)?;
        let base = args
            .config
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        fs::create_dir_all(&args.out).map_err(|source| CliError::Output {
            path: args.out.clone(),
            source,
        })?;
        Ok(Self {
            seed: config.seed(args.seed),
            config,
            base,
            out: args.out.clone(),
            grid_resolution: args.grid_resolution,
        })
    }

    fn write(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        fs::write(&path, text).map_err(|source| CliError::Output { path, source })
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).expect("serializable report");
        self.write(name, &text)
    }

    fn write_with<F>(&self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf).expect("writing to memory");
        self.write(name, &String::from_utf8(buf).expect("utf-8 output"))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => simulate_cmd(&Context::new(&a)?),
        Command::Estimate(a) => {
            let ctx = Context::new(&a)?;
            let panel = ingest(&ctx.config, &ctx.base, 2)?;
            let fit = estimate_cmd(&ctx, &panel)?;
            converged(&fit)
        }
        Command::AnalyzeSelection(a) => {
            let ctx = Context::new(&a)?;
            analyze_cmd(&ctx, None)?;
            Ok(())
        }
        Command::Gof(a) => {
            let ctx = Context::new(&a)?;
            let panel = ingest(&ctx.config, &ctx.base, 2)?;
            let fit = match &ctx.config.gof.fit {
                Some(p) => load_fit(&ctx.base.join(p))?,
                None => estimate_cmd(&ctx, &panel)?,
            };
            gof_cmd(&ctx, &panel, &fit)?;
            Ok(())
        }
        Command::Report(a) => report_cmd(&Context::new(&a)?),
    }
}

fn converged(fit: &MoMResult) -> Result<(), CliError> {
    if fit.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(fit.max_conv_ratio))
    }
}

fn load_fit(path: &Path) -> Result<MoMResult, CliError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        IngestError::Invalid {
            path: path.to_path_buf(),
            msg: e.to_string(),
        }
        .into()
    })
}

fn simulate_cmd(ctx: &Context) -> Result<(), CliError> {
    let panel = ingest(&ctx.config, &ctx.base, 1)?;
    let resolved = ctx.config.resolve_effects()?;
    let beta = resolved
        .values
        .iter()
        .zip(&resolved.effects)
        .map(|(v, e)| v.ok_or_else(|| ConfigError::Invalid(format!("effect {e} needs a value to simulate"))))
        .collect::<Result<Vec<f64>, _>>()?;
    let rates = ctx
        .config
        .rates
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("simulation needs [rates] values".into()))?;
    let periods = ctx.config.simulation.periods.unwrap_or(rates.values.len());
    let params = ParameterVector::new(resolved.effects, beta).map_err(ConfigError::from)?;
    let opts = SimOptions {
        seed: ctx.seed,
        period_length: ctx.config.simulation.period_length,
        max_events: ctx.config.simulation.max_events,
    };
    let rates = RateParameters::new(rates.values.clone())?;
    let sim = simulate_panel(
        &panel.waves()[0],
        &params,
        &rates,
        panel.covariates(),
        periods,
        &opts,
    )?;
    let sim = NetworkPanel::new(sim.waves().to_vec(), panel.covariates().clone(), panel.actor_labels().to_vec())
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    write_panel(ctx, &sim)
}

/// Writes waves, actors and covariates plus a configuration that re-reads them.
fn write_panel(ctx: &Context, panel: &NetworkPanel) -> Result<(), CliError> {
    let mut config = ctx.config.clone();
    config.data.waves.clear();
    for (m, w) in panel.waves().iter().enumerate() {
        let name = format!("wave{}.txt", m + 1);
        ctx.write(&name, &io::format_adjacency(w))?;
        config.data.waves.push(name.into());
    }
    ctx.write("actors.txt", &(panel.actor_labels().join("\n") + "\n"))?;
    config.data.actors = Some("actors.txt".into());
    for c in config.covariates.iter_mut() {
        let cov = panel.covariates().get(&c.name).expect("ingested covariate");
        let shift = if cov.is_centered() { cov.raw_mean() } else { 0.0 };
        let raw: Vec<f64> = cov.values().iter().map(|v| v + shift).collect();
        let name = format!("{}.csv", c.name);
        ctx.write(&name, &io::format_covariate(panel.actor_labels(), &raw))?;
        c.file = name.into();
    }
    config.seed = Some(ctx.seed);
    let text = toml::to_string(&config).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    ctx.write("simulated.toml", &text)
}

fn estimate_cmd(ctx: &Context, panel: &NetworkPanel) -> Result<MoMResult, CliError> {
    let resolved = ctx.config.resolve_effects()?;
    let mut options = ctx.config.estimation.clone();
    options.seed = ctx.seed;
    if options.initial.is_none() {
        // configured values serve as starting values when every parameter has one
        if let (Some(r), true) = (&ctx.config.rates, resolved.values.iter().all(Option::is_some)) {
            if r.values.len() == panel.n_periods() {
                let mut init = r.values.clone();
                init.extend(resolved.values.iter().map(|v| v.expect("checked")));
                options.initial = Some(init);
            }
        }
    }
    let fit = estimate(panel, &resolved.effects, &options)?;
    ctx.write_json("fit.json", &fit)?;
    ctx.write("estimates.txt", &estimates_table(&fit))?;
    Ok(fit)
}

pub fn estimates_table(fit: &MoMResult) -> String {
    let mut s = format!(
        "{:<20} {:>10} {:>10} {:>8} {:>8} {:>8}\n",
        "parameter", "estimate", "s.e.", "z", "p", "conv.t"
    );
    for (k, name) in fit.parameter_names.iter().enumerate() {
        let (z, p) = match t_test(fit, k) {
            Ok(t) => (format!("{:.2}", t.statistic), format!("{:.4}", t.p_value)),
            Err(_) => ("-".into(), "-".into()),
        };
        s.push_str(&format!(
            "{name:<20} {:>10.4} {:>10.4} {z:>8} {p:>8} {:>8.3}\n",
            fit.theta[k], fit.std_errors[k], fit.conv_t_ratios[k]
        ));
    }
    s.push_str(&format!(
        "\noverall maximum convergence ratio {:.3}; converged: {}; phase-3 runs {}\n",
        fit.max_conv_ratio, fit.converged, fit.n_phase3
    ));
    s
}

fn gof_cmd(ctx: &Context, panel: &NetworkPanel, fit: &MoMResult) -> Result<Vec<GofReport>, CliError> {
    let g = &ctx.config.gof;
    let reports = gof_families(panel, fit, &g.families, g.n_sim, ctx.seed)?;
    for r in &reports {
        ctx.write_with(&format!("gof_{}.csv", r.family), |w| r.write_violin(w))?;
    }
    ctx.write_json("gof.json", &reports)?;
    ctx.write("gof.txt", &gof_summary(&reports))?;
    Ok(reports)
}

pub fn gof_summary(reports: &[GofReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&format!(
            "{:<24} Mahalanobis distance {:>8.3}  p = {:.3}\n",
            r.family.name(),
            r.mahalanobis_observed,
            r.p_value
        ));
        if let Some((obs, mean)) = r.transitive {
            s.push_str(&format!(
                "{:<24} transitive triads observed {obs}, simulated mean {mean:.1}\n",
                ""
            ));
        }
    }
    s
}

fn analysis_scale(
    ctx: &Context,
    covariate: &str,
    covs: Option<&Covariates>,
) -> Result<CovariateScale, CliError> {
    let a = ctx.config.analysis.as_ref().expect("checked by caller");
    if let Some([lo, hi]) = a.range {
        return Ok(CovariateScale::new(lo, hi, a.mean.unwrap_or(0.0)).map_err(ConfigError::from)?);
    }
    let owned;
    let covs = match covs {
        Some(c) => c,
        None => {
            owned = ingest(&ctx.config, &ctx.base, 1)?.covariates().clone();
            &owned
        }
    };
    let cov = covs.get(covariate).ok_or_else(|| {
        ConfigError::Invalid(format!(
            "covariate `{covariate}` is not in the data; give [analysis] range instead"
        ))
    })?;
    let mut scale = CovariateScale::from(cov);
    if let Some(m) = a.mean {
        scale.mean = m;
    }
    Ok(scale)
}

fn analyze_cmd(ctx: &Context, fit: Option<(&MoMResult, &Covariates)>) -> Result<SelectionReport, CliError> {
    let a = ctx
        .config
        .analysis
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("missing [analysis] section".into()))?;
    let scale = analysis_scale(ctx, &a.covariate, fit.map(|f| f.1))?;
    let input = match (a.theta, &a.fit, fit) {
        (Some(theta), _, _) => SelectionInput {
            covariate: a.covariate.clone(),
            theta,
            covariance: match (a.covariance, a.std_errors) {
                (Some(c), _) => Some(crate::selection::ThetaCovariance::full(c)),
                (None, Some(se)) => Some(crate::selection::ThetaCovariance::from_std_errors(se)),
                (None, None) => None,
            },
            scale,
        },
        (None, _, Some((f, _))) => SelectionInput::from_fit(f, &a.covariate, scale)?,
        (None, Some(p), None) => SelectionInput::from_fit(&load_fit(&ctx.base.join(p))?, &a.covariate, scale)?,
        (None, None, None) => {
            return Err(ConfigError::Invalid("[analysis] needs `theta` or `fit`".into()).into())
        }
    };
    let ego_values = a.ego_values.clone().unwrap_or_else(|| scale.grid(5));
    let report = analyze_selection(&input, &ego_values, ctx.grid_resolution, a.alpha)?;
    ctx.write_json("selection_report.json", &report)?;
    ctx.write("selection_summary.txt", &report.summary())?;
    ctx.write_with("selection_table.csv", |w| report.table.write_rows(w))?;
    ctx.write_with("optimum_curve.csv", |w| report.table.write_optimum(w))?;
    Ok(report)
}

fn report_cmd(ctx: &Context) -> Result<(), CliError> {
    let panel = ingest(&ctx.config, &ctx.base, 2)?;
    let fit = estimate_cmd(ctx, &panel)?;
    let gof = gof_cmd(ctx, &panel, &fit)?;
    let selection = if ctx.config.analysis.is_some() {
        Some(analyze_cmd(ctx, Some((&fit, panel.covariates())))?)
    } else {
        None
    };
    #[derive(Serialize)]
    struct Bundle<'a> {
        fit: &'a MoMResult,
        gof: &'a [GofReport],
        selection: Option<&'a SelectionReport>,
    }
    ctx.write_json(
        "report.json",
        &Bundle {
            fit: &fit,
            gof: &gof,
            selection: selection.as_ref(),
        },
    )?;
    let mut text = estimates_table(&fit);
    text.push('\n');
    text.push_str(&gof_summary(&gof));
    if let Some(s) = &selection {
        text.push('\n');
        text.push_str(&s.summary());
    }
    ctx.write("report.txt", &text)?;
    converged(&fit)
}
