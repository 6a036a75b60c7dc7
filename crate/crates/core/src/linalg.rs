//! Small dense symmetric solvers for the per-model normal equations.
//!
//! Model dimensions stay in the tens, so a row-oriented Cholesky on a flat
//! buffer is all that is needed on the hot path. Rank-deficient systems fall
//! back to a minimum-norm solve through an SVD.

use nalgebra::{DMatrix, DVector};

/// Pivots below this fraction of the original diagonal entry are treated as
/// zero.
const PIVOT_RTOL: f64 = 1e-12;

/// Lower-triangular factor `L` with `L Lᵀ = A`, stored row-major in a `d × d`
/// buffer (upper triangle left at zero).
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factor a symmetric `d × d` row-major matrix. Returns `None` when the
    /// matrix is not numerically positive definite.
    pub fn factor(a: &[f64], dim: usize) -> Option<Self> {
        assert_eq!(a.len(), dim * dim);
        let mut l = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut s = a[i * dim + j];
                for k in 0..j {
                    s -= l[i * dim + k] * l[j * dim + k];
                }
                if i == j {
                    let scale = a[i * dim + i].abs().max(f64::MIN_POSITIVE);
                    #[allow(clippy::neg_cmp_op_on_partial_ord)]
                    if !(s > PIVOT_RTOL * scale) {
                        return None;
                    }
                    l[i * dim + i] = s.sqrt();
                } else {
                    l[i * dim + j] = s / l[j * dim + j];
                }
            }
        }
        Some(Self { dim, l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let d = self.dim;
        assert_eq!(b.len(), d);
        let l = &self.l;
        let mut z = b.to_vec();
        for i in 0..d {
            let mut s = z[i];
            for k in 0..i {
                s -= l[i * d + k] * z[k];
            }
            z[i] = s / l[i * d + i];
        }
        for i in (0..d).rev() {
            let mut s = z[i];
            for k in i + 1..d {
                s -= l[k * d + i] * z[k];
            }
            z[i] = s / l[i * d + i];
        }
        z
    }
}

/// Minimum-norm solution of `A x = b` for symmetric positive semi-definite `A`.
pub fn min_norm_solve(a: &[f64], dim: usize, b: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(dim, dim, a);
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (smax * 1e-10).max(f64::MIN_POSITIVE);
    let rhs = DVector::from_column_slice(b);
    match svd.solve(&rhs, eps) {
        Ok(x) => x.iter().copied().collect(),
        Err(_) => vec![0.0; dim],
    }
}

/// Outcome of a (possibly regularized) normal-equations solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSolution {
    pub beta: Vec<f64>,
    /// Set when the Cholesky route failed and the minimum-norm fallback was used.
    pub singular_fallback: bool,
}

/// Solve `(G + ridge·I) β = rhs` for a symmetric `d × d` Gram matrix.
pub fn solve_normal_equations(gram: &[f64], dim: usize, rhs: &[f64], ridge: f64) -> NormalSolution {
    if dim == 0 {
        return NormalSolution { beta: Vec::new(), singular_fallback: false };
    }
    let mut a = gram.to_vec();
    if ridge > 0.0 {
        for i in 0..dim {
            a[i * dim + i] += ridge;
        }
    }
    match Cholesky::factor(&a, dim) {
        Some(ch) => NormalSolution { beta: ch.solve(rhs), singular_fallback: false },
        None => NormalSolution { beta: min_norm_solve(&a, dim, rhs), singular_fallback: true },
    }
}

/// `log Σ exp(v_i)`, with `-∞` for an empty or all-`-∞` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[i * 3 + j] * x_true[j]).sum())
            .collect();
        let x = Cholesky::factor(&a, 3).unwrap().solve(&b);
        for (u, v) in x.iter().zip(x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicated_columns_fall_back_to_min_norm() {
        // Gram of two identical all-ones columns over n = 4 rows.
        let g = [4.0, 4.0, 4.0, 4.0];
        let rhs = [8.0, 8.0];
        let sol = solve_normal_equations(&g, 2, &rhs, 0.0);
        assert!(sol.singular_fallback);
        assert!((sol.beta[0] - 1.0).abs() < 1e-10);
        assert!((sol.beta[1] - 1.0).abs() < 1e-10);

        let ridged = solve_normal_equations(&g, 2, &rhs, 1e-8 * 4.0);
        assert!(!ridged.singular_fallback);
        assert!((ridged.beta[0] + ridged.beta[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_sum_exp(&[0.0, f64::NEG_INFINITY]) - 0.0).abs() < 1e-15);
    }
}
