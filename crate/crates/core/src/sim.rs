//! Simulated benchmark data: three additive models on four signal
//! covariates, padded with `p − 4` noise covariates.

use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SimModel {
    /// Independent uniform covariates, smooth components, noise variance 0.1.
    One,
    /// Model one with correlated Gaussian covariates, `Σ_ij = 2^{−|i−j|−2}`.
    Two,
    /// Weighted, rougher components, noise variance 0.5.
    Three,
}

impl SimModel {
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(SimModel::One),
            2 => Ok(SimModel::Two),
            3 => Ok(SimModel::Three),
            other => Err(Error::UnknownSimModel(other)),
        }
    }

    pub fn id(self) -> u8 {
        match self {
            SimModel::One => 1,
            SimModel::Two => 2,
            SimModel::Three => 3,
        }
    }

    /// Variance of the Gaussian noise.
    pub fn noise_var(self) -> f64 {
        match self {
            SimModel::One | SimModel::Two => 0.1,
            SimModel::Three => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSpec {
    pub model: SimModel,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
}

impl SimSpec {
    pub fn new(model_id: u8, n: usize, p: usize, seed: u64) -> Result<Self> {
        let model = SimModel::from_id(model_id)?;
        if p < 4 {
            return Err(Error::InvalidParameter(format!(
                "simulated models use covariates 1-4, so p must be at least 4 (got {p})"
            )));
        }
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(Self { model, n, p, seed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub data: Dataset,
    /// Noise-free `ψ⋆(X_i)`.
    pub truth: Vec<f64>,
    pub noise_var: f64,
}

/// Contribution of covariate `j` (zero-based) to `ψ⋆`, including the outer
/// weights of model three. Covariates past the fourth contribute nothing.
pub fn truth_fn(model: SimModel, j: usize, x: f64) -> f64 {
    match model {
        SimModel::One | SimModel::Two => match j {
            0 => -(2.0 * x).sin(),
            1 => x.powi(3),
            2 => x,
            3 => (-x).exp() - E / 2.0,
            _ => 0.0,
        },
        SimModel::Three => {
            let s = (2.0 * PI * x).sin();
            let c = (2.0 * PI * x).cos();
            match j {
                0 => 5.0 * x,
                1 => 3.0 * 4.0 * (x * x - x - 1.0),
                2 => 4.0 * s / (2.0 - s),
                3 => {
                    6.0 * (0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c.powi(3) + 0.5 * s.powi(3))
                }
                _ => 0.0,
            }
        }
    }
}

/// `ψ⋆(x)` for one row.
pub fn truth_value(model: SimModel, row: &[f64]) -> f64 {
    row.iter().take(4).enumerate().map(|(j, &x)| truth_fn(model, j, x)).sum()
}

/// `Σ_ij = 2^{−|i−j|−2}`.
pub fn correlated_covariance(p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| 2f64.powi(-(i.abs_diff(j) as i32) - 2))
}

/// Row-major `n × p` covariates: uniform on `(−1, 1)` for models one and
/// three, `N(0, Σ)` rows (unclipped) for model two.
pub fn gen_covariates<R: Rng + ?Sized>(spec: &SimSpec, rng: &mut R) -> Vec<f64> {
    let (n, p) = (spec.n, spec.p);
    match spec.model {
        SimModel::One | SimModel::Three => (0..n * p).map(|_| rng.random_range(-1.0..1.0)).collect(),
        SimModel::Two => {
            let chol = correlated_covariance(p)
                .cholesky()
                .expect("the covariance is positive definite");
            let l = chol.l();
            let mut out = Vec::with_capacity(n * p);
            for _ in 0..n {
                let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
                out.extend((&l * z).iter());
            }
            out
        }
    }
}

/// Covariates, truth and responses, all determined by `spec.seed`.
pub fn simulate(spec: &SimSpec) -> Result<SimOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let x = gen_covariates(spec, &mut rng);
    let truth: Vec<f64> = x.chunks_exact(spec.p).map(|row| truth_value(spec.model, row)).collect();
    let noise_var = spec.model.noise_var();
    let sd = noise_var.sqrt();
    let y = truth
        .iter()
        .map(|t| t + sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(SimOutput { data: Dataset::new(spec.n, spec.p, x, y)?, truth, noise_var })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_examples() {
        assert_eq!(truth_fn(SimModel::One, 0, 0.0), 0.0);
        assert!((truth_fn(SimModel::One, 3, 0.0) - (1.0 - E / 2.0)).abs() < 1e-15);
        assert!((truth_fn(SimModel::One, 3, 0.0) + 0.359141).abs() < 1e-6);
        assert_eq!(truth_fn(SimModel::Three, 1, 0.0), -12.0);
        assert_eq!(truth_fn(SimModel::Two, 7, 0.3), 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(SimSpec::new(2, 10, 3, 0).is_err());
        assert_eq!(SimSpec::new(4, 10, 5, 0), Err(Error::UnknownSimModel(4)));
        assert!(SimSpec::new(1, 0, 5, 0).is_err());
    }

    #[test]
    fn covariance_entries() {
        let s = correlated_covariance(5);
        assert_eq!(s[(0, 0)], 0.25);
        assert_eq!(s[(0, 2)], 0.0625);
        assert_eq!(s[(3, 1)], 0.0625);
    }

    #[test]
    fn uniform_covariate_moments() {
        let spec = SimSpec::new(1, 100_000, 4, 17).unwrap();
        let x = gen_covariates(&spec, &mut ChaCha8Rng::seed_from_u64(17));
        let col: Vec<f64> = x.chunks_exact(4).map(|r| r[0]).collect();
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 * (1.0 / 3f64.sqrt()) / n.sqrt(), "{mean}");
        assert!((var - 1.0 / 3.0).abs() < 0.05 / 3.0, "{var}");
    }

    #[test]
    fn correlated_covariates_match_covariance() {
        let p = 6;
        let spec = SimSpec::new(2, 100_000, p, 3).unwrap();
        let x = gen_covariates(&spec, &mut ChaCha8Rng::seed_from_u64(3));
        let n = spec.n as f64;
        let target = correlated_covariance(p);
        let means: Vec<f64> = (0..p).map(|j| x.chunks_exact(p).map(|r| r[j]).sum::<f64>() / n).collect();
        for a in 0..p {
            for b in a..p {
                let cov = x
                    .chunks_exact(p)
                    .map(|r| (r[a] - means[a]) * (r[b] - means[b]))
                    .sum::<f64>()
                    / (n - 1.0);
                if a == b {
                    assert!((cov - target[(a, b)]).abs() < 0.05 * target[(a, b)], "{a} {cov}");
                } else {
                    assert!((cov - target[(a, b)]).abs() < 0.01, "{a} {b} {cov}");
                }
            }
        }
    }

    #[test]
    fn noise_has_the_stated_variance() {
        let out = simulate(&SimSpec::new(1, 10_000, 4, 8).unwrap()).unwrap();
        let resid: Vec<f64> = out.data.y().iter().zip(&out.truth).map(|(y, t)| y - t).collect();
        let n = resid.len() as f64;
        let mean = resid.iter().sum::<f64>() / n;
        let var = resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 0.1).abs() < 0.005, "{var}");
        assert_eq!(out.noise_var, 0.1);
    }

    #[test]
    fn truth_ignores_noise_covariates() {
        let out = simulate(&SimSpec::new(3, 50, 7, 2).unwrap()).unwrap();
        for (i, row) in out.data.rows().enumerate() {
            let mut permuted = row.to_vec();
            permuted[4..].reverse();
            assert_eq!(truth_value(SimModel::Three, &permuted), out.truth[i]);
        }
    }

    #[test]
    fn model_one_truth_is_bounded() {
        let bound = 2f64.sin() + 1.0 + 1.0 + (E - E / 2.0);
        let out = simulate(&SimSpec::new(1, 2000, 4, 5).unwrap()).unwrap();
        assert!(out.truth.iter().all(|t| t.abs() <= bound));
    }

    #[test]
    fn simulation_is_reproducible() {
        let spec = SimSpec::new(2, 30, 5, 99).unwrap();
        assert_eq!(simulate(&spec).unwrap(), simulate(&spec).unwrap());
    }
}
