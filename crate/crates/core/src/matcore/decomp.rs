use super::dense::{Matrix, SymMatrix};
use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `L·Lᵀ = A`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    factor: Matrix,
    logdet: f64,
}

impl Cholesky {
    pub fn new(a: &SymMatrix) -> Result<Self> {
        let n = a.dim();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a.get(j, j);
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if diag.is_nan() || diag <= 0.0 || !diag.is_finite() {
                return Err(Error::NotPd {
                    pivot: j,
                    value: diag,
                });
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        let logdet = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>();
        Ok(Self { factor: l, logdet })
    }

    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    /// Solves `A x = b` by forward and back substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.factor.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let l = &self.factor;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        Ok(y)
    }
}

/// Factor and log-determinant of a positive definite matrix.
pub fn cholesky_logdet(a: &SymMatrix) -> Result<(Matrix, f64)> {
    let c = Cholesky::new(a)?;
    Ok((c.factor, c.logdet))
}

/// Householder QR of a square matrix: returns `(Q, R)` with `Q` orthogonal
/// and `R` upper triangular. No sign normalization is applied to `R`.
pub fn householder_qr(m: &Matrix) -> (Matrix, Matrix) {
    let n = m.rows();
    assert_eq!(n, m.cols(), "householder_qr expects a square matrix");
    let mut r = m.clone();
    let mut q = Matrix::identity(n);
    let mut v = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        let mut alpha = 0.0;
        for i in k..n {
            alpha += r[(i, k)] * r[(i, k)];
        }
        let alpha = alpha.sqrt();
        if alpha == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] > 0.0 { -alpha } else { alpha };
        for i in 0..n {
            v[i] = if i < k { 0.0 } else { r[(i, k)] };
        }
        v[k] -= alpha;
        let vnorm2: f64 = v[k..].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // R <- (I - 2vvᵀ/|v|²) R
        for j in 0..n {
            let s: f64 = (k..n).map(|i| v[i] * r[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..n {
                r[(i, j)] -= s * v[i];
            }
        }
        // Q <- Q (I - 2vvᵀ/|v|²)
        for i in 0..n {
            let s: f64 = (k..n).map(|j| q[(i, j)] * v[j]).sum::<f64>() * 2.0 / vnorm2;
            for j in k..n {
                q[(i, j)] -= s * v[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            r[(i, j)] = 0.0;
        }
    }
    (q, r)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(m: &Matrix) -> f64 {
    let n = m.rows();
    assert_eq!(n, m.cols(), "determinant expects a square matrix");
    let mut a = m.clone();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .unwrap_or(k);
        if a[(pivot, k)] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(pivot, j)];
                a[(pivot, j)] = tmp;
            }
            det = -det;
        }
        let akk = a[(k, k)];
        det *= akk;
        for i in (k + 1)..n {
            let f = a[(i, k)] / akk;
            if f != 0.0 {
                for j in k..n {
                    a[(i, j)] -= f * a[(k, j)];
                }
            }
        }
    }
    det
}
