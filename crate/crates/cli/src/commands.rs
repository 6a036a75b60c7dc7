//! Argument parsing and the four subcommands.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use pacbam::prelude::*;

use crate::artifact::{ConfigEcho, EstimatorKind, FitArtifact};
use crate::bench::{run_benchmark, write_report, BenchSpec, RssDesign};
use crate::io;

/// Invalid flag combinations detected after parsing. Reported with exit
/// code 2 like clap's own errors.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "pacbam", version, about = "Sparse additive regression with PAC-Bayesian Gibbs estimators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a dataset from one of the simulation models.
    Simulate(SimulateArgs),
    /// Run the sampler on a dataset and write a JSON fit artifact.
    Fit(FitArgs),
    /// Evaluate a fitted estimator on new covariates.
    Predict(PredictArgs),
    /// Repeated simulate/fit/RSS runs over a list of dimensions.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub model: u8,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the noise-free regression values (`psi_star`).
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaFlag {
    Auto,
    Value(f64),
}

impl FromStr for DeltaFlag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Self::Value(v)),
            _ => Err(format!("expected `auto` or a positive number, got `{s}`")),
        }
    }
}

impl fmt::Display for DeltaFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Value(v) => write!(f, "{v}"),
        }
    }
}

fn parse_q(s: &str) -> std::result::Result<MoveProbs, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number")))
        .collect::<std::result::Result<_, _>>()?;
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got {}", parts.len()));
    }
    MoveProbs::new(parts[0], parts[1], parts[2]).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RejectionFlag {
    /// Take the fresh draw made for the current model.
    Fresh,
    /// Keep the previous coefficients.
    Keep,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub iters: usize,
    /// Defaults to half the iterations.
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    /// Radius of the ℓ¹ ball carrying the coefficient prior.
    #[arg(long, default_value_t = 1e6)]
    pub c: f64,
    /// Noise variance used by `--delta auto`.
    #[arg(long)]
    pub noise_var: Option<f64>,
    /// Estimate the noise variance from a pilot linear fit when
    /// `--noise-var` is absent.
    #[arg(long)]
    pub plugin_noise: bool,
    /// Inverse temperature, or `auto` for n / (4 · noise variance).
    #[arg(long, default_value = "auto")]
    pub delta: DeltaFlag,
    /// Proposal variance; defaults to 1/δ.
    #[arg(long)]
    pub sigma2_prop: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    /// Move probabilities `q+,q-,q=`.
    #[arg(long, value_parser = parse_q, default_value = "0.3333333333333333,0.3333333333333333,0.3333333333333334")]
    pub q: MoveProbs,
    #[arg(long, value_enum, default_value_t = RejectionFlag::Fresh)]
    pub rejection: RejectionFlag,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Store every state of the chain in the artifact.
    #[arg(long)]
    pub trace_full: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub fit: PathBuf,
    /// Covariates `x1,…,xp`; a trailing `y` column is ignored.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = EstimatorKind::Aggregated)]
    pub estimator: EstimatorKind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub model: u8,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p_list: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// One count for all cells or one per entry of `--p-list`; defaults to
    /// 3000, 10000, 20000 for p = 50, 200, 400.
    #[arg(long, value_delimiter = ',')]
    pub iters_list: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = RssDesign::Train)]
    pub rss_design: RssDesign,
    /// Fill the `seconds` column with wall-clock times.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate_cmd(a),
        Command::Fit(a) => fit_cmd(a),
        Command::Predict(a) => predict_cmd(a),
        Command::Benchmark(a) => benchmark_cmd(a),
    }
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    if a.p < 4 {
        return Err(usage(format!("--p must be at least 4, got {}", a.p)));
    }
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    let sim = simulate(&SimSpec::new(a.model, a.n, a.p, a.seed)?)?;
    io::write_dataset(&a.out, &sim.data)?;
    if let Some(path) = &a.truth_out {
        io::write_column(path, "psi_star", &sim.truth)?;
    }
    Ok(())
}

/// Validated sampler configuration plus the echo written to the artifact.
pub fn build_fit_config(a: &FitArgs, data: &Dataset) -> Result<(SamplerConfig, ConfigEcho)> {
    let (noise_var, estimated) = match (a.noise_var, a.plugin_noise) {
        (Some(v), _) => {
            if !(v > 0.0 && v.is_finite()) {
                return Err(usage(format!("--noise-var must be positive, got {v}")));
            }
            (Some(v), false)
        }
        (None, true) => (Some(estimate_noise_var(data)?), true),
        (None, false) => (None, false),
    };
    let temperature = match (a.delta, noise_var) {
        (DeltaFlag::Value(delta), _) => Temperature::Explicit { delta },
        (DeltaFlag::Auto, Some(noise_var)) => Temperature::Practical { noise_var },
        (DeltaFlag::Auto, None) => {
            return Err(usage("--delta auto needs --noise-var (or --plugin-noise)"));
        }
    };
    if let Some(b) = a.burnin {
        if b >= a.iters && a.iters > 0 {
            return Err(usage(format!("--burnin {b} must be below --iters {}", a.iters)));
        }
    }
    let mut builder = SamplerConfig::builder(data.p())
        .alpha(a.alpha)
        .c_radius(a.c)
        .temperature(temperature)
        .k_max(a.k_max)
        .move_probs(a.q)
        .iterations(a.iters)
        .burn_in(a.burnin.unwrap_or(a.iters / 2))
        .seed(a.seed)
        .rejection(match a.rejection {
            RejectionFlag::Fresh => RejectionPolicy::FreshDraw,
            RejectionFlag::Keep => RejectionPolicy::KeepPrevious,
        });
    if let Some(s2) = a.sigma2_prop {
        builder = builder.sigma2_prop(s2);
    }
    let config = builder.build().map_err(|e| usage(e.to_string()))?;
    let delta = temperature.resolve(data.n())?;
    let proposal = config.proposal_params(data.n(), delta)?;
    let echo = ConfigEcho {
        data: a.data.display().to_string(),
        n: data.n(),
        p: data.p(),
        iterations: config.iterations,
        burn_in: config.burn_in,
        alpha: a.alpha,
        c: a.c,
        k_max: a.k_max,
        q: a.q.as_array(),
        delta_flag: a.delta.to_string(),
        noise_var,
        noise_var_estimated: estimated,
        sigma2_prop: proposal.sigma2_prop(),
        ridge_lambda: proposal.ridge_lambda(),
        rejection: config.rejection,
        seed: a.seed,
    };
    Ok((config, echo))
}

fn fit_cmd(a: FitArgs) -> Result<()> {
    let data = io::read_dataset(&a.data)?;
    let (config, echo) = build_fit_config(&a, &data)?;
    let res = fit(&data, config).context("sampler failed")?;
    FitArtifact::new(echo, &res, a.trace_full).write(&a.out)
}

fn predict_cmd(a: PredictArgs) -> Result<()> {
    let artifact = FitArtifact::read(&a.fit)?;
    let table = io::read_table(&a.data)?;
    if table.p != artifact.config.p {
        anyhow::bail!(
            "{} has {} covariate columns but the fit used {}",
            a.data.display(),
            table.p,
            artifact.config.p
        );
    }
    let f = artifact.estimator(a.estimator)?;
    let y_hat = predict(&f, &table.x, table.p)?;
    io::write_column(&a.out, "y_hat", &y_hat)
}

fn benchmark_cmd(a: BenchmarkArgs) -> Result<()> {
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    if a.p_list.iter().any(|&p| p < 4) {
        return Err(usage("every entry of --p-list must be at least 4"));
    }
    let mut spec = BenchSpec::new(a.model, a.p_list, a.iters_list, a.runs, a.n, a.seed)
        .map_err(|e| usage(e.to_string()))?;
    spec.design = a.rss_design;
    let cells = run_benchmark(&spec)?;
    write_report(&a.out, &cells, a.timing)
}
