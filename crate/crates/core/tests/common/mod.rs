//! Reference computations that share no code with the library's solvers:
//! the symmetrized operator is rebuilt from its definition, and extreme
//! eigenvalues come from bisection on Sylvester inertia counts.

#![allow(dead_code)]

use waxman::{Branch, ModelProblem};

/// `A_ij = V_ij / sqrt((t_i − ε)(t_j − ε))`
pub fn sym_matrix(p: &ModelProblem, eps: f64) -> Vec<Vec<f64>> {
    let n = p.dim();
    let t = p.t_diag.as_slice();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| p.v.get(i, j) / ((t[i] - eps) * (t[j] - eps)).sqrt())
                .collect()
        })
        .collect()
}

/// Number of eigenvalues of `a` strictly above `mu`: the negative pivots
/// of `mu·I − a` in an unpivoted LDLᵀ factorization.
#[allow(clippy::needless_range_loop)]
pub fn count_above(a: &[Vec<f64>], mu: f64) -> usize {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { mu - a[i][j] } else { -a[i][j] })
                .collect()
        })
        .collect();
    let mut negatives = 0;
    for k in 0..n {
        let mut d = m[k][k];
        if d == 0.0 {
            d = f64::EPSILON * (1.0 + mu.abs());
        }
        if d < 0.0 {
            negatives += 1;
        }
        for i in (k + 1)..n {
            let f = m[i][k] / d;
            for j in (k + 1)..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    negatives
}

fn row_bounds(a: &[Vec<f64>]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, row) in a.iter().enumerate() {
        let r: f64 = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, x)| x.abs())
            .sum();
        lo = lo.min(row[i] - r);
        hi = hi.max(row[i] + r);
    }
    (lo - 1e-12, hi + 1e-12)
}

/// Largest or smallest eigenvalue of a symmetric matrix by bisection.
pub fn extreme_eigenvalue(a: &[Vec<f64>], highest: bool) -> f64 {
    let n = a.len();
    let (mut lo, mut hi) = row_bounds(a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let above = count_above(a, mid);
        let go_up = if highest { above >= 1 } else { above == n };
        if go_up {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn lambda_oracle(p: &ModelProblem, eps: f64, branch: Branch) -> f64 {
    1.0 / extreme_eigenvalue(&sym_matrix(p, eps), branch == Branch::Highest)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Unsymmetrized power iteration on `G_εV` in the problem's own
/// coordinates, read off as a component ratio; meaningful when the top of
/// the spectrum dominates.
pub fn unsymmetric_power_lambda(p: &ModelProblem, eps: f64, iters: usize) -> f64 {
    let n = p.dim();
    let t = p.t_diag.as_slice();
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| p.v.get(i, j) * x[j]).sum::<f64>() / (t[i] - eps))
            .collect()
    };
    let mut x = vec![1.0; n];
    for _ in 0..iters {
        let y = apply(&x);
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.into_iter().map(|v| v / ny).collect();
    }
    let y = apply(&x);
    let k = (0..n)
        .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
        .unwrap();
    x[k] / y[k]
}
