//! Data, empirical risk, inverse temperature and the Gibbs log-score.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::AdditiveFunction;
use crate::error::{Error, Result};
use crate::linalg::solve_normal_equations;
use crate::model_space::ModelIndex;
use crate::prior::{log_prior_density, Coefficients, PriorParams, LOG_ZERO};

/// Design `x` (row-major `n × p`) and responses `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(n: usize, p: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if p == 0 {
            return Err(Error::InvalidParameter("p must be at least 1".into()));
        }
        if x.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, got: x.len() });
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("dataset contains non-finite values".into()));
        }
        Ok(Self { n, p, x, y })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::DimensionMismatch { expected: p, got: bad.len() });
        }
        Self::new(rows.len(), p, rows.concat(), y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.p)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    /// Sample correlation between covariate `j` and the response; zero when
    /// either has no spread.
    pub fn correlation(&self, j: usize) -> f64 {
        let n = self.n as f64;
        let mx = self.column(j).sum::<f64>() / n;
        let my = self.y.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (xv, yv) in self.column(j).zip(&self.y) {
            let (dx, dy) = (xv - mx, yv - my);
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        if sxx <= 0.0 || syy <= 0.0 {
            0.0
        } else {
            sxy / (sxx * syy).sqrt()
        }
    }
}

/// How the inverse temperature `δ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Temperature {
    /// `δ = n / (4σ²)`.
    Practical { noise_var: f64 },
    /// `δ = nℓ / [w + 4(σ² + C²)]` with `w = 8C·max(L, C)`.
    Theoretical {
        noise_var: f64,
        bernstein_l: f64,
        ell: f64,
        c_radius: f64,
    },
    Explicit { delta: f64 },
}

impl Temperature {
    pub fn resolve(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let n = n as f64;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            Temperature::Practical { noise_var } => {
                Ok(n / (4.0 * positive("noise variance", noise_var)?))
            }
            Temperature::Theoretical { noise_var, bernstein_l, ell, c_radius } => {
                let s2 = positive("noise variance", noise_var)?;
                let l = positive("L", bernstein_l)?;
                let c = positive("C", c_radius)?;
                if !(ell > 0.0 && ell < 1.0) {
                    return Err(Error::InvalidParameter(format!("ell must lie in (0, 1), got {ell}")));
                }
                let w = 8.0 * c * l.max(c);
                Ok(n * ell / (w + 4.0 * (s2 + c * c)))
            }
            Temperature::Explicit { delta } => positive("delta", delta),
        }
    }
}

pub fn resolve_delta(spec: &Temperature, n: usize) -> Result<f64> {
    spec.resolve(n)
}

/// `r_n = (1/n) Σ_i (y_i − ψ(x_i))²`.
pub fn empirical_risk(f: &AdditiveFunction, data: &Dataset) -> Result<f64> {
    if f.p() != data.p() {
        return Err(Error::DimensionMismatch { expected: data.p(), got: f.p() });
    }
    Ok(empirical_risk_unchecked(f, data))
}

pub(crate) fn empirical_risk_unchecked(f: &AdditiveFunction, data: &Dataset) -> f64 {
    let sum: f64 = data
        .rows()
        .zip(data.y())
        .map(|(x, y)| {
            let r = y - f.eval_unchecked(x);
            r * r
        })
        .sum();
    sum / data.n() as f64
}

/// Unnormalized log Gibbs posterior: `log π(m, θ) − δ r_n(ψ_θ)`.
pub fn log_gibbs_score(
    m: &ModelIndex,
    theta: &Coefficients,
    data: &Dataset,
    delta: f64,
    prior: &PriorParams,
) -> Result<f64> {
    let log_prior = log_prior_density(m, theta, prior)?;
    if log_prior == LOG_ZERO {
        return Ok(LOG_ZERO);
    }
    let f = AdditiveFunction::new(m.clone(), theta.clone())?;
    Ok(log_prior - delta * empirical_risk(&f, data)?)
}

/// Monte Carlo estimates of both sides of `R(ψ) − R(ψ⋆) = E[ψ⋆(X) − ψ(X)]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessRiskEstimate {
    pub lhs: f64,
    pub se_lhs: f64,
    pub rhs: f64,
    pub se_rhs: f64,
}

impl ExcessRiskEstimate {
    /// `|lhs − rhs|` in units of the standard error of the difference.
    pub fn discrepancy(&self) -> f64 {
        let se = self.se_lhs.hypot(self.se_rhs);
        if se == 0.0 {
            if self.lhs == self.rhs { 0.0 } else { f64::INFINITY }
        } else {
            (self.lhs - self.rhs).abs() / se
        }
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// The left side draws `(X, ξ)` pairs with Gaussian noise of variance
/// `noise_var` and averages `(Y − ψ(X))² − (Y − ψ⋆(X))²`; the right side uses
/// an independent batch of designs.
pub fn excess_risk_mc<T, D>(
    f: &AdditiveFunction,
    truth: T,
    mut design: D,
    noise_var: f64,
    n_mc: usize,
    seed: u64,
) -> ExcessRiskEstimate
where
    T: Fn(&[f64]) -> f64,
    D: FnMut(&mut ChaCha8Rng) -> Vec<f64>,
{
    assert!(n_mc >= 1, "n_mc must be at least 1");
    let sd = noise_var.max(0.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lhs: Vec<f64> = (0..n_mc)
        .map(|_| {
            let x = design(&mut rng);
            let noise: f64 = rng.sample(StandardNormal);
            let star = truth(&x);
            let y = star + sd * noise;
            (y - f.eval_unchecked(&x)).powi(2) - (y - star).powi(2)
        })
        .collect();
    let rhs: Vec<f64> = (0..n_mc)
        .map(|_| {
            let x = design(&mut rng);
            (truth(&x) - f.eval_unchecked(&x)).powi(2)
        })
        .collect();
    let (lhs, se_lhs) = mean_and_se(&lhs);
    let (rhs, se_rhs) = mean_and_se(&rhs);
    ExcessRiskEstimate { lhs, se_lhs, rhs, se_rhs }
}

/// Plug-in noise variance: residual variance of a pilot least-squares fit of
/// `y` on an intercept and the raw covariates. When `p + 1` is not well below
/// `n`, only the `⌊n/2⌋ − 1` covariates most correlated with `y` enter the
/// pilot fit.
pub fn estimate_noise_var(data: &Dataset) -> Result<f64> {
    let n = data.n();
    if n < 3 {
        return Err(Error::InvalidParameter(
            "at least three observations are needed to estimate the noise variance".into(),
        ));
    }
    let budget = (n / 2).saturating_sub(1).max(1);
    let mut cols: Vec<usize> = (0..data.p()).collect();
    if data.p() > budget {
        let mut scored: Vec<(usize, f64)> =
            cols.iter().map(|&j| (j, data.correlation(j).abs())).collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        cols = scored.into_iter().take(budget).map(|(j, _)| j).collect();
        cols.sort_unstable();
    }
    let d = cols.len() + 1;
    let feature = |row: &[f64], c: usize| if c == 0 { 1.0 } else { row[cols[c - 1]] };
    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    for (row, &y) in data.rows().zip(data.y()) {
        for a in 0..d {
            let fa = feature(row, a);
            rhs[a] += fa * y;
            for b in 0..d {
                gram[a * d + b] += fa * feature(row, b);
            }
        }
    }
    let beta = solve_normal_equations(&gram, d, &rhs, 1e-10 * n as f64).beta;
    let rss: f64 = data
        .rows()
        .zip(data.y())
        .map(|(row, &y)| {
            let fit: f64 = (0..d).map(|c| beta[c] * feature(row, c)).sum();
            (y - fit).powi(2)
        })
        .sum();
    Ok(rss / (n - d) as f64)
}
