//! The non-normalized trigonometric dictionary and sparse additive functions
//! built on it.
//!
//! `φ_1(t) = 1`, `φ_{2j}(t) = cos(πjt)`, `φ_{2j+1}(t) = sin(πjt)` for `j ≥ 1`.
//! Arguments outside `(-1, 1)` are evaluated as-is.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_space::ModelIndex;
use crate::prior::Coefficients;

/// One-based index into the dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(usize);

impl BasisIndex {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidBasisIndex);
        }
        Ok(Self(k))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// `φ_k(t)` for an already validated index.
#[inline]
pub(crate) fn phi(k: usize, t: f64) -> f64 {
    debug_assert!(k >= 1);
    if k == 1 {
        1.0
    } else {
        let freq = (k / 2) as f64;
        if k.is_multiple_of(2) {
            (PI * freq * t).cos()
        } else {
            (PI * freq * t).sin()
        }
    }
}

pub fn eval_basis(k: BasisIndex, t: f64) -> f64 {
    phi(k.0, t)
}

/// Fill `out[k-1] = φ_k(t)` for `k = 1..=out.len()`.
pub(crate) fn phi_prefix(t: f64, out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = phi(i + 1, t);
    }
}

/// `ψ_θ(x) = Σ_{j ∈ S(m)} Σ_{k ≤ m_j} θ_jk φ_k(x_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveFunction {
    model: ModelIndex,
    coefficients: Coefficients,
}

impl AdditiveFunction {
    pub fn new(model: ModelIndex, coefficients: Coefficients) -> Result<Self> {
        coefficients.check_conforms(&model)?;
        Ok(Self { model, coefficients })
    }

    /// The identically zero function on `p` covariates.
    pub fn zero(p: usize) -> Self {
        Self {
            model: ModelIndex::empty(p),
            coefficients: Coefficients::default(),
        }
    }

    pub fn model(&self) -> &ModelIndex {
        &self.model
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn p(&self) -> usize {
        self.model.p()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), got: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|(j, theta)| {
                theta
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * phi(i + 1, x[j]))
                    .sum::<f64>()
            })
            .sum()
    }
}

pub fn eval_additive(f: &AdditiveFunction, x: &[f64]) -> Result<f64> {
    f.eval(x)
}
