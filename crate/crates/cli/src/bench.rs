//! Repeated simulate → fit → RSS pipelines over a grid of dimensions.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use pacbam::prelude::*;
use pacbam::rng::mix;

/// Published mean (sd) RSS for the three simulation models at p = 50, 200, 400.
const REFERENCE: [[(f64, f64); 3]; 3] = [
    [(0.0318, 0.0047), (0.0320, 0.0029), (0.0335, 0.0056)],
    [(0.0411, 0.0061), (0.1746, 0.0639), (0.2201, 0.0992)],
    [(0.0665, 0.0421), (0.1151, 0.0399), (0.1597, 0.0579)],
];

pub fn reference(model: u8, p: usize) -> Option<(f64, f64)> {
    let col = match p {
        50 => 0,
        200 => 1,
        400 => 2,
        _ => return None,
    };
    REFERENCE.get(usize::from(model).checked_sub(1)?).map(|row| row[col])
}

/// Chain length used for `p` when none is given.
pub fn default_iters(p: usize) -> Option<usize> {
    match p {
        50 => Some(3000),
        200 => Some(10000),
        400 => Some(20000),
        _ => None,
    }
}

pub fn derive_seed(master: u64, run: u64) -> u64 {
    mix(&[master, run])
}

/// Where the RSS is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RssDesign {
    /// The training covariates.
    Train,
    /// A fresh design of the same size drawn with an independent seed.
    Fresh,
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub model: u8,
    pub p_list: Vec<usize>,
    pub iters_list: Vec<usize>,
    pub runs: usize,
    pub n: usize,
    pub seed: u64,
    pub design: RssDesign,
}

impl BenchSpec {
    /// `iters` may be empty (defaults per `p`), a single value for all
    /// cells, or one value per `p`.
    pub fn new(model: u8, p_list: Vec<usize>, iters: Vec<usize>, runs: usize, n: usize, seed: u64) -> Result<Self> {
        SimModel::from_id(model)?;
        if p_list.is_empty() {
            bail!("--p-list is empty");
        }
        if runs == 0 {
            bail!("--runs must be at least 1");
        }
        let iters_list = match iters.len() {
            0 => p_list
                .iter()
                .map(|&p| default_iters(p).with_context(|| format!("no default iteration count for p = {p}; pass --iters-list")))
                .collect::<Result<Vec<_>>>()?,
            1 => vec![iters[0]; p_list.len()],
            k if k == p_list.len() => iters,
            k => bail!("--iters-list has {k} entries for {} dimensions", p_list.len()),
        };
        if iters_list.contains(&0) {
            bail!("iteration counts must be positive");
        }
        Ok(Self { model, p_list, iters_list, runs, n, seed, design: RssDesign::Train })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub rss: f64,
    pub aggregated_risk: f64,
    pub mean_post_burn_in_risk: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub model: u8,
    pub p: usize,
    pub n: usize,
    pub iters: usize,
    pub runs: Vec<RunOutcome>,
    pub rss_mean: f64,
    /// Sample standard deviation; NaN for a single run.
    pub rss_sd: f64,
    pub reference: Option<(f64, f64)>,
    pub seconds: f64,
}

fn one_run(spec: &BenchSpec, p: usize, iters: usize, run: usize) -> Result<RunOutcome> {
    let seed = derive_seed(spec.seed, run as u64);
    let start = Instant::now();
    let sim = simulate(&SimSpec::new(spec.model, spec.n, p, seed)?)?;
    let config = SamplerConfig::builder(p)
        .temperature(Temperature::Practical { noise_var: sim.noise_var })
        .iterations(iters)
        .seed(seed)
        .build()?;
    let res = fit(&sim.data, config)?;
    let rss = match spec.design {
        RssDesign::Train => rss(&res.aggregated, &sim.truth, sim.data.x(), p)?,
        RssDesign::Fresh => {
            let test = simulate(&SimSpec::new(spec.model, spec.n, p, mix(&[seed, 1]))?)?;
            rss(&res.aggregated, &test.truth, test.data.x(), p)?
        }
    };
    Ok(RunOutcome {
        run,
        seed,
        rss,
        aggregated_risk: res.summary.aggregated_risk,
        mean_post_burn_in_risk: res.summary.mean_post_burn_in_risk,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_benchmark(spec: &BenchSpec) -> Result<Vec<CellReport>> {
    spec.p_list
        .iter()
        .zip(&spec.iters_list)
        .map(|(&p, &iters)| {
            let start = Instant::now();
            let runs = (0..spec.runs)
                .into_par_iter()
                .map(|r| one_run(spec, p, iters, r))
                .collect::<Result<Vec<_>>>()?;
            let (rss_mean, rss_sd) = mean_sd(&runs.iter().map(|r| r.rss).collect::<Vec<_>>());
            Ok(CellReport {
                model: spec.model,
                p,
                n: spec.n,
                iters,
                runs,
                rss_mean,
                rss_sd,
                reference: reference(spec.model, p),
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

pub const REPORT_HEADER: &str = "model,p,n,iters,runs,rss_mean,rss_sd,paper_mean,paper_sd,seconds";

/// CSV report. Without `timing` the `seconds` column is NaN so that equal
/// flags give identical files.
pub fn format_report(cells: &[CellReport], timing: bool) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for c in cells {
        let (pm, ps) = c.reference.unwrap_or((f64::NAN, f64::NAN));
        let secs = if timing { c.seconds } else { f64::NAN };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.model,
            c.p,
            c.n,
            c.iters,
            c.runs.len(),
            c.rss_mean,
            c.rss_sd,
            pm,
            ps,
            secs
        )
        .expect("writing to a String");
    }
    out
}

pub fn write_report(path: &Path, cells: &[CellReport], timing: bool) -> Result<()> {
    std::fs::write(path, format_report(cells, timing)).with_context(|| format!("cannot write {}", path.display()))
}
