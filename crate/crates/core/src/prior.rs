//! Sparsity prior over models and the uniform ℓ¹-ball prior within a model.
//!
//! All densities are returned in log space; [`LOG_ZERO`] stands for a zero
//! density.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::error::{Error, Result};
use crate::model_space::ModelIndex;

/// Log of a zero density.
pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorParams {
    alpha: f64,
    c_radius: f64,
    p: usize,
}

impl PriorParams {
    pub fn new(alpha: f64, c_radius: f64, p: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1/2), got {alpha}")));
        }
        if !(c_radius > 0.0 && c_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "the l1 radius C must be positive and finite, got {c_radius}"
            )));
        }
        if p == 0 {
            return Err(Error::InvalidParameter("p must be at least 1".into()));
        }
        Ok(Self { alpha, c_radius, p })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_radius(&self) -> f64 {
        self.c_radius
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Log of the normalizing constant `(1 - r) / (1 - r^{p+1})`, `r = α/(1-α)`.
    pub fn log_norm_const(&self) -> f64 {
        let r = self.alpha / (1.0 - self.alpha);
        (1.0 - r).ln() - (-r.powi(self.p as i32 + 1)).ln_1p()
    }
}

/// Coefficients `θ ∈ Θ_m`: for each active covariate, its `m_j` expansion
/// coefficients.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coefficients {
    entries: BTreeMap<usize, Vec<f64>>,
}

impl Coefficients {
    pub fn from_pairs<I: IntoIterator<Item = (usize, Vec<f64>)>>(pairs: I) -> Self {
        Self { entries: pairs.into_iter().collect() }
    }

    /// Inverse of [`Coefficients::to_flat`].
    pub fn from_flat(model: &ModelIndex, flat: &[f64]) -> Result<Self> {
        if flat.len() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), got: flat.len() });
        }
        let mut entries = BTreeMap::new();
        let mut off = 0;
        for j in model.active() {
            let s = model.size(j);
            entries.insert(j, flat[off..off + s].to_vec());
            off += s;
        }
        Ok(Self { entries })
    }

    /// Flatten in the model's canonical layout (covariates ascending, then `k`).
    pub fn to_flat(&self) -> Vec<f64> {
        self.entries.values().flatten().copied().collect()
    }

    pub fn get(&self, j: usize) -> Option<&[f64]> {
        self.entries.get(&j).map(Vec::as_slice)
    }

    /// `θ_jk` with a one-based `k`; absent slots read as zero.
    pub fn slot(&self, j: usize, k: usize) -> f64 {
        self.entries.get(&j).and_then(|v| v.get(k - 1)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.entries.iter().map(|(&j, v)| (j, v.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.values().flatten().map(|c| c.abs()).sum()
    }

    pub fn check_conforms(&self, model: &ModelIndex) -> Result<()> {
        for (&j, v) in &self.entries {
            if j >= model.p() {
                return Err(Error::NonConformal(format!("covariate {j} is outside p = {}", model.p())));
            }
            if v.len() != model.size(j) {
                return Err(Error::NonConformal(format!(
                    "covariate {j} has {} coefficients but m_j = {}",
                    v.len(),
                    model.size(j)
                )));
            }
        }
        if let Some(j) = model.active().find(|j| !self.entries.contains_key(j)) {
            return Err(Error::NonConformal(format!("active covariate {j} has no coefficients")));
        }
        Ok(())
    }
}

/// `log η_α(m) = log c_α − log C(p, |S(m)|) + (Σ_j m_j) log α`.
pub fn log_eta(m: &ModelIndex, params: &PriorParams) -> f64 {
    debug_assert_eq!(m.p(), params.p);
    let s = m.support_size() as u64;
    params.log_norm_const() - ln_binomial(params.p as u64, s) + m.dim() as f64 * params.alpha.ln()
}

/// `log V_m(C) = M log(2C) − log M!` with `M = Σ_j m_j`; zero for the empty
/// model.
pub fn log_ball_volume(m: &ModelIndex, c_radius: f64) -> f64 {
    let total = m.dim();
    if total == 0 {
        return 0.0;
    }
    total as f64 * (2.0 * c_radius).ln() - ln_factorial(total as u64)
}

/// `log η_α(m) − log V_m(C)` inside the ℓ¹-ball, [`LOG_ZERO`] outside.
pub fn log_prior_density(m: &ModelIndex, theta: &Coefficients, params: &PriorParams) -> Result<f64> {
    theta.check_conforms(m)?;
    Ok(log_prior_density_unchecked(m, theta.l1_norm(), params))
}

pub(crate) fn log_prior_density_unchecked(m: &ModelIndex, l1: f64, params: &PriorParams) -> f64 {
    if l1 > params.c_radius {
        return LOG_ZERO;
    }
    log_eta(m, params) - log_ball_volume(m, params.c_radius)
}
