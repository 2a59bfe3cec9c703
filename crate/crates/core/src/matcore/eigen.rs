//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Each sweep visits every off-diagonal pair once and annihilates it with a
//! plane rotation. Convergence is quadratic once the off-diagonal mass is
//! small; at the dimensions used here (a few hundred at most) a handful of
//! sweeps suffices.

use super::dense::{Matrix, SymMatrix};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V · diag(f(λ)) · Vᵀ`, symmetrized.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        SymMatrix::from_upper_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * mapped[k] * v[(j, k)]).sum()
        })
    }
}

fn off_diagonal_sq(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    s
}

/// Applies the rotation that zeroes `a[p][q]`, accumulating it into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

pub fn sym_eigen(m: &SymMatrix) -> SymEigen {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut v = Matrix::identity(n);

    let total = a.frobenius_norm().powi(2);
    if total > 0.0 {
        let stop = total * (f64::EPSILON * f64::EPSILON) * 1e-4;
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_sq(&a) <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    // Skip entries already negligible against both diagonals.
                    let apq = a[(p, q)].abs();
                    let small = 1e-3 * f64::EPSILON;
                    if apq <= small * a[(p, p)].abs() && apq <= small * a[(q, q)].abs() {
                        a[(p, q)] = 0.0;
                        a[(q, p)] = 0.0;
                        continue;
                    }
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymEigen { values, vectors }
}
