//! Randomized and aggregated Gibbs estimators, prediction and RSS.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::AdditiveFunction;
use crate::error::{Error, Result};
use crate::model_space::{ModelIndex, MoveKind};
use crate::prior::Coefficients;
use crate::risk::{empirical_risk_unchecked, Dataset};
use crate::sampler::{ChainTrace, Sampler, SamplerConfig};

/// The function defined by the final state `(m(T), θ(T))`.
pub fn randomized_estimate(trace: &ChainTrace) -> AdditiveFunction {
    let last = trace.last();
    AdditiveFunction::new(last.model.clone(), last.coefficients.clone())
        .expect("trace states are conformal")
}

/// Coefficient-wise mean of `θ(b+1), …, θ(T)`, reading slots absent from a
/// visited model as zero. The result lives on the union of visited slots.
pub fn aggregated_estimate(trace: &ChainTrace, burn_in: usize) -> Result<AdditiveFunction> {
    let iterations = trace.iterations();
    if burn_in >= iterations {
        return Err(Error::BurnIn { burn_in, iterations });
    }
    let window = &trace.states[burn_in + 1..];
    let mut sums: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for state in window {
        for (j, theta) in state.coefficients.iter() {
            let acc = sums.entry(j).or_default();
            if acc.len() < theta.len() {
                acc.resize(theta.len(), 0.0);
            }
            for (a, t) in acc.iter_mut().zip(theta) {
                *a += t;
            }
        }
    }
    let count = window.len() as f64;
    let mut sizes = vec![0; trace.p];
    for (&j, acc) in sums.iter_mut() {
        sizes[j] = acc.len();
        for a in acc.iter_mut() {
            *a /= count;
        }
    }
    let k_max = sizes.iter().copied().max().unwrap_or(0);
    let model = ModelIndex::new(sizes, k_max)?;
    AdditiveFunction::new(model, Coefficients::from_pairs(sums))
}

/// Row-wise evaluation of `f` on a row-major matrix with `ncols` columns.
pub fn predict(f: &AdditiveFunction, x: &[f64], ncols: usize) -> Result<Vec<f64>> {
    if ncols != f.p() {
        return Err(Error::DimensionMismatch { expected: f.p(), got: ncols });
    }
    if ncols == 0 || !x.len().is_multiple_of(ncols) {
        return Err(Error::InvalidParameter(format!(
            "matrix of {} entries does not split into rows of {ncols}",
            x.len()
        )));
    }
    Ok(x.chunks_exact(ncols).map(|row| f.eval_unchecked(row)).collect())
}

/// Mean squared deviation `(1/n) Σ_i (f(x_i) − ψ⋆(x_i))²` from noise-free
/// truth values on the rows of `x`.
pub fn rss(f: &AdditiveFunction, truth: &[f64], x: &[f64], ncols: usize) -> Result<f64> {
    let fitted = predict(f, x, ncols)?;
    if fitted.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: fitted.len(), got: truth.len() });
    }
    if fitted.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sum: f64 = fitted.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(sum / fitted.len() as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveStats {
    pub attempted: usize,
    pub accepted: usize,
}

impl MoveStats {
    pub fn rate(&self) -> Option<f64> {
        (self.attempted > 0).then(|| self.accepted as f64 / self.attempted as f64)
    }
}

/// Chain diagnostics reported alongside a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub addition: MoveStats,
    pub deletion: MoveStats,
    pub adjustment: MoveStats,
    /// Support sizes of post-burn-in states.
    pub support_histogram: BTreeMap<usize, usize>,
    /// Empirical risk of `θ(t)` for `t = 0..=T`.
    pub empirical_risk: Vec<f64>,
    pub mean_post_burn_in_risk: f64,
    pub aggregated_risk: f64,
    pub randomized_risk: f64,
    /// Active covariates of `m(T)`.
    pub final_support: Vec<usize>,
}

impl FitSummary {
    pub fn stats(&self, kind: MoveKind) -> &MoveStats {
        match kind {
            MoveKind::Addition => &self.addition,
            MoveKind::Deletion => &self.deletion,
            MoveKind::Adjustment => &self.adjustment,
        }
    }
}

/// Both estimators and diagnostics from one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub config: SamplerConfig,
    pub delta: f64,
    pub randomized: AdditiveFunction,
    pub aggregated: AdditiveFunction,
    pub summary: FitSummary,
    pub trace: ChainTrace,
}

impl FitResult {
    pub fn from_trace(trace: ChainTrace, config: SamplerConfig, data: &Dataset) -> Result<Self> {
        let burn_in = config.burn_in;
        // T = 0 leaves no post-burn-in window; aggregate the initial state.
        let aggregated = if trace.iterations() == 0 {
            randomized_estimate(&trace)
        } else {
            aggregated_estimate(&trace, burn_in)?
        };
        let randomized = randomized_estimate(&trace);

        let mut stats = [MoveStats::default(); 3];
        for r in &trace.records {
            let s = &mut stats[r.kind.index()];
            s.attempted += 1;
            s.accepted += usize::from(r.accepted);
        }
        let start = if trace.iterations() == 0 { 0 } else { burn_in + 1 };
        let window = &trace.states[start..];
        let mut support_histogram = BTreeMap::new();
        for s in window {
            *support_histogram.entry(s.model.support_size()).or_insert(0) += 1;
        }
        let mean_post_burn_in_risk =
            window.iter().map(|s| s.empirical_risk).sum::<f64>() / window.len() as f64;
        let summary = FitSummary {
            addition: stats[0],
            deletion: stats[1],
            adjustment: stats[2],
            support_histogram,
            empirical_risk: trace.states.iter().map(|s| s.empirical_risk).collect(),
            mean_post_burn_in_risk,
            aggregated_risk: empirical_risk_unchecked(&aggregated, data),
            randomized_risk: empirical_risk_unchecked(&randomized, data),
            final_support: randomized.model().active().collect(),
        };
        Ok(Self { delta: trace.delta, config, randomized, aggregated, summary, trace })
    }
}

/// Run a chain on `data` and build both estimators.
pub fn fit(data: &Dataset, config: SamplerConfig) -> Result<FitResult> {
    let sampler = Sampler::new(data, config.clone())?;
    let trace = sampler.run()?;
    FitResult::from_trace(trace, config, data)
}
