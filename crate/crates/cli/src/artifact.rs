//! The JSON fit artifact written by `fit` and read by `predict`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use pacbam::prelude::*;

/// One coefficient `θ_jk`; `j` is the 1-based covariate column. Stored in
/// JSON as `[j, k, value]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, f64)", into = "(usize, usize, f64)")]
pub struct Triple {
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

impl From<(usize, usize, f64)> for Triple {
    fn from((j, k, value): (usize, usize, f64)) -> Self {
        Self { j, k, value }
    }
}

impl From<Triple> for (usize, usize, f64) {
    fn from(t: Triple) -> Self {
        (t.j, t.k, t.value)
    }
}

pub fn to_triples(f: &AdditiveFunction) -> Vec<Triple> {
    f.model()
        .layout()
        .zip(f.coefficients().to_flat())
        .map(|((j, k), value)| Triple { j: j + 1, k, value })
        .collect()
}

/// Rebuild a function on `p` covariates. Each covariate's indices must run
/// `1..=m_j` without gaps.
pub fn from_triples(p: usize, triples: &[Triple]) -> Result<AdditiveFunction> {
    let mut coef: Vec<Vec<f64>> = vec![Vec::new(); p];
    for t in triples {
        if t.j == 0 || t.j > p {
            bail!("coefficient for covariate {} outside 1..={p}", t.j);
        }
        let slot = &mut coef[t.j - 1];
        if t.k != slot.len() + 1 {
            bail!("coefficients of covariate {} are not listed as k = 1, 2, …", t.j);
        }
        slot.push(t.value);
    }
    let sizes: Vec<usize> = coef.iter().map(Vec::len).collect();
    let k_max = sizes.iter().copied().max().unwrap_or(0).max(1);
    let model = ModelIndex::new(sizes, k_max)?;
    let pairs = coef.into_iter().enumerate().filter(|(_, c)| !c.is_empty());
    Ok(AdditiveFunction::new(model, Coefficients::from_pairs(pairs))?)
}

/// Settings a fit was run with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub data: String,
    pub n: usize,
    pub p: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub alpha: f64,
    pub c: f64,
    pub k_max: usize,
    pub q: [f64; 3],
    /// `"auto"` or the literal value given.
    pub delta_flag: String,
    pub noise_var: Option<f64>,
    pub noise_var_estimated: bool,
    pub sigma2_prop: f64,
    pub ridge_lambda: f64,
    pub rejection: RejectionPolicy,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveDiagnostics {
    pub attempted: usize,
    pub accepted: usize,
    pub rate: Option<f64>,
}

impl From<&MoveStats> for MoveDiagnostics {
    fn from(s: &MoveStats) -> Self {
        Self { attempted: s.attempted, accepted: s.accepted, rate: s.rate() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub addition: MoveDiagnostics,
    pub deletion: MoveDiagnostics,
    pub adjustment: MoveDiagnostics,
    pub overall: Option<f64>,
}

/// Per-iteration record kept with `--trace-full`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub t: usize,
    pub kind: char,
    pub proposed: Option<Vec<usize>>,
    pub acceptance_prob: f64,
    pub accepted: bool,
    pub model: Vec<usize>,
    pub coefficients: Vec<Triple>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    pub config: ConfigEcho,
    pub delta: f64,
    pub aggregated: Vec<Triple>,
    pub randomized: Vec<Triple>,
    pub acceptance: Acceptance,
    /// Support sizes of post-burn-in states, as `(size, count)`.
    pub support_histogram: Vec<(usize, usize)>,
    /// 1-based active covariates of the final state.
    pub final_support: Vec<usize>,
    pub aggregated_risk: f64,
    pub randomized_risk: f64,
    pub mean_post_burn_in_risk: f64,
    /// Empirical risk of `θ(t)`, `t = 0..=T`.
    pub empirical_risk: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
}

impl FitArtifact {
    pub fn new(config: ConfigEcho, res: &FitResult, trace_full: bool) -> Self {
        let s = &res.summary;
        let attempted = s.addition.attempted + s.deletion.attempted + s.adjustment.attempted;
        let accepted = s.addition.accepted + s.deletion.accepted + s.adjustment.accepted;
        let trace = trace_full.then(|| {
            res.trace
                .records
                .iter()
                .zip(&res.trace.states[1..])
                .map(|(r, st)| TraceEntry {
                    t: r.iteration,
                    kind: r.kind.symbol(),
                    proposed: r.proposed.as_ref().map(|m| m.sizes().to_vec()),
                    acceptance_prob: r.acceptance_prob,
                    accepted: r.accepted,
                    model: st.model.sizes().to_vec(),
                    coefficients: st
                        .model
                        .layout()
                        .zip(st.coefficients.to_flat())
                        .map(|((j, k), value)| Triple { j: j + 1, k, value })
                        .collect(),
                })
                .collect()
        });
        Self {
            config,
            delta: res.delta,
            aggregated: to_triples(&res.aggregated),
            randomized: to_triples(&res.randomized),
            acceptance: Acceptance {
                addition: (&s.addition).into(),
                deletion: (&s.deletion).into(),
                adjustment: (&s.adjustment).into(),
                overall: (attempted > 0).then(|| accepted as f64 / attempted as f64),
            },
            support_histogram: s.support_histogram.iter().map(|(a, b)| (*a, *b)).collect(),
            final_support: s.final_support.iter().map(|j| j + 1).collect(),
            aggregated_risk: s.aggregated_risk,
            randomized_risk: s.randomized_risk,
            mean_post_burn_in_risk: s.mean_post_burn_in_risk,
            empirical_risk: s.empirical_risk.clone(),
            trace,
        }
    }

    pub fn estimator(&self, which: EstimatorKind) -> Result<AdditiveFunction> {
        let triples = match which {
            EstimatorKind::Aggregated => &self.aggregated,
            EstimatorKind::Randomized => &self.randomized,
        };
        from_triples(self.config.p, triples)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("{} is not a fit artifact", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EstimatorKind {
    Aggregated,
    Randomized,
}
