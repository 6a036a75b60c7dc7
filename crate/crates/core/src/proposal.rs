//! Per-model design matrices, least-squares proposal centers and the
//! isotropic Gaussian proposal.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::{phi, phi_prefix};
use crate::error::{Error, Result};
use crate::linalg::{solve_normal_equations, NormalSolution};
use crate::model_space::ModelIndex;
use crate::risk::Dataset;

/// `D_m`: column `(j, k)` holds `φ_k(X_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    /// Column-major `n × d`.
    columns: Vec<f64>,
    layout: Vec<(usize, usize)>,
}

impl DesignMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.layout.len()
    }

    /// `(covariate j, one-based basis index k)` for each column.
    pub fn layout(&self) -> &[(usize, usize)] {
        &self.layout
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.columns[c * self.n..(c + 1) * self.n]
    }

    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.columns[c * self.n + i]
    }

    /// `D'D` (row-major) and `D'y`.
    pub fn normal_equations(&self, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.ncols();
        let mut gram = vec![0.0; d * d];
        for a in 0..d {
            for b in a..d {
                let v: f64 = self.column(a).iter().zip(self.column(b)).map(|(u, w)| u * w).sum();
                gram[a * d + b] = v;
                gram[b * d + a] = v;
            }
        }
        let rhs = (0..d)
            .map(|a| self.column(a).iter().zip(y).map(|(u, w)| u * w).sum())
            .collect();
        (gram, rhs)
    }
}

pub fn build_design(m: &ModelIndex, data: &Dataset) -> Result<DesignMatrix> {
    if m.p() != data.p() {
        return Err(Error::DimensionMismatch { expected: data.p(), got: m.p() });
    }
    if m.support_size() == 0 {
        return Err(Error::EmptyModel);
    }
    let n = data.n();
    let layout: Vec<(usize, usize)> = m.layout().collect();
    let mut columns = Vec::with_capacity(n * layout.len());
    for &(j, k) in &layout {
        columns.extend(data.column(j).map(|t| phi(k, t)));
    }
    Ok(DesignMatrix { n, columns, layout })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalParams {
    sigma2_prop: f64,
    ridge_lambda: f64,
}

impl ProposalParams {
    pub fn new(sigma2_prop: f64, ridge_lambda: f64) -> Result<Self> {
        if !(sigma2_prop > 0.0 && sigma2_prop.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "proposal variance must be positive, got {sigma2_prop}"
            )));
        }
        if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ridge penalty must be non-negative, got {ridge_lambda}"
            )));
        }
        Ok(Self { sigma2_prop, ridge_lambda })
    }

    /// Default ridge penalty `1e-8 · n`.
    pub fn default_ridge(n: usize) -> f64 {
        1e-8 * n as f64
    }

    pub fn sigma2_prop(&self) -> f64 {
        self.sigma2_prop
    }

    pub fn ridge_lambda(&self) -> f64 {
        self.ridge_lambda
    }
}

/// Least-squares proposal center `(D'D + λI)^{-1} D'Y`, falling back to the
/// minimum-norm solution when the system is singular.
pub fn lse(m: &ModelIndex, data: &Dataset, params: &ProposalParams) -> Result<NormalSolution> {
    let design = build_design(m, data)?;
    let (gram, rhs) = design.normal_equations(data.y());
    Ok(solve_normal_equations(&gram, design.ncols(), &rhs, params.ridge_lambda))
}

/// `log φ(θ; μ, σ²I) = −(d/2) log(2πσ²) − ‖θ − μ‖² / (2σ²)`.
pub fn gaussian_log_density(theta: &[f64], mean: &[f64], sigma2: f64) -> Result<f64> {
    if theta.len() != mean.len() {
        return Err(Error::DimensionMismatch { expected: mean.len(), got: theta.len() });
    }
    let sq: f64 = theta.iter().zip(mean).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(gaussian_log_density_sq(theta.len(), sq, sigma2))
}

#[inline]
pub(crate) fn gaussian_log_density_sq(dim: usize, sq_dist: f64, sigma2: f64) -> f64 {
    -0.5 * dim as f64 * (2.0 * PI * sigma2).ln() - sq_dist / (2.0 * sigma2)
}

/// `mean + σ z` with `z` standard normal.
pub fn sample_proposal<R: Rng + ?Sized>(mean: &[f64], sigma2: f64, rng: &mut R) -> Vec<f64> {
    let sd = sigma2.sqrt();
    mean.iter()
        .map(|mu| {
            let z: f64 = rng.sample(StandardNormal);
            mu + sd * z
        })
        .collect()
}

/// Gram matrix of every dictionary column `φ_k(x_j)`, `k ≤ K`, so that the
/// normal equations of any model are a sub-block lookup.
#[derive(Debug, Clone)]
pub struct GramCache {
    n: usize,
    p: usize,
    k_max: usize,
    gram: Vec<f64>,
    xty: Vec<f64>,
    yty: f64,
}

impl GramCache {
    pub fn new(data: &Dataset, k_max: usize) -> Self {
        let (n, p) = (data.n(), data.p());
        let width = p * k_max;
        let mut features = DMatrix::<f64>::zeros(n, width);
        let mut buf = vec![0.0; k_max];
        for (i, row) in data.rows().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                phi_prefix(t, &mut buf);
                for (k, v) in buf.iter().enumerate() {
                    features[(i, j * k_max + k)] = *v;
                }
            }
        }
        let g = features.tr_mul(&features);
        let mut gram = vec![0.0; width * width];
        for a in 0..width {
            for b in 0..width {
                gram[a * width + b] = g[(a, b)];
            }
        }
        let xty = (0..width)
            .map(|c| features.column(c).iter().zip(data.y()).map(|(u, w)| u * w).sum())
            .collect();
        let yty = data.y().iter().map(|v| v * v).sum();
        Self { n, p, k_max, gram, xty, yty }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Global column ids of a model in canonical layout.
    pub fn columns(&self, m: &ModelIndex) -> Vec<usize> {
        m.layout().map(|(j, k)| j * self.k_max + k - 1).collect()
    }

    pub fn sub_gram(&self, cols: &[usize]) -> Vec<f64> {
        let width = self.p * self.k_max;
        let d = cols.len();
        let mut out = vec![0.0; d * d];
        for (a, &ca) in cols.iter().enumerate() {
            let row = &self.gram[ca * width..(ca + 1) * width];
            for (b, &cb) in cols.iter().enumerate() {
                out[a * d + b] = row[cb];
            }
        }
        out
    }

    pub fn sub_rhs(&self, cols: &[usize]) -> Vec<f64> {
        cols.iter().map(|&c| self.xty[c]).collect()
    }

    pub fn lse(&self, cols: &[usize], ridge: f64) -> NormalSolution {
        solve_normal_equations(&self.sub_gram(cols), cols.len(), &self.sub_rhs(cols), ridge)
    }

    /// `‖y − Dθ‖²` from the cached moments, clamped at zero.
    pub fn rss(&self, cols: &[usize], theta: &[f64]) -> f64 {
        let width = self.p * self.k_max;
        let mut quad = 0.0;
        let mut lin = 0.0;
        for (a, &ca) in cols.iter().enumerate() {
            let row = &self.gram[ca * width..(ca + 1) * width];
            let inner: f64 = cols.iter().zip(theta).map(|(&cb, t)| row[cb] * t).sum();
            quad += theta[a] * inner;
            lin += theta[a] * self.xty[ca];
        }
        (self.yty - 2.0 * lin + quad).max(0.0)
    }
}
