//! Dense symmetric-matrix primitives.

mod decomp;
mod dense;
mod eigen;

pub use decomp::{cholesky_logdet, determinant, householder_qr, Cholesky};
pub use dense::{dot, norm, Matrix, SymMatrix, SYMMETRY_TOL};
pub use eigen::{sym_eigen, SymEigen};

use crate::error::{Error, Result};

/// Negative eigenvalues down to `-PSD_REL_TOL * max|λ|` count as rounding noise.
pub const PSD_REL_TOL: f64 = 1e-10;
/// Eigenvalues at or below `DEFAULT_RANK_TOL * max λ` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// A principal cosine above `1 - ANGLE_TOL` counts as a shared direction.
pub const ANGLE_TOL: f64 = 1e-8;
pub const UNIT_TOL: f64 = 1e-12;
pub const ORTHONORMAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct PsdCertificate {
    pub matrix: SymMatrix,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
}

impl PsdCertificate {
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue >= -self.tolerance
    }
}

pub fn psd_certificate(a: &SymMatrix) -> PsdCertificate {
    let eig = sym_eigen(a);
    PsdCertificate {
        matrix: a.clone(),
        min_eigenvalue: eig.min_value(),
        tolerance: PSD_REL_TOL * eig.max_abs_value(),
    }
}

fn checked_psd_eigen(a: &SymMatrix) -> Result<SymEigen> {
    let eig = sym_eigen(a);
    let tolerance = PSD_REL_TOL * eig.max_abs_value();
    let min = eig.min_value();
    if min < -tolerance || !min.is_finite() {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            tolerance,
        });
    }
    Ok(eig)
}

/// Symmetric PSD square root; small negative eigenvalues are clamped to zero.
pub fn sym_sqrt(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = checked_psd_eigen(a)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

/// Moore–Penrose pseudo-inverse of a PSD matrix.
pub fn pseudo_inverse(a: &SymMatrix, rank_tol: f64) -> Result<SymMatrix> {
    let eig = checked_psd_eigen(a)?;
    let cutoff = rank_tol * eig.max_value();
    Ok(eig.reconstruct_with(|l| if l > cutoff && l > 0.0 { 1.0 / l } else { 0.0 }))
}

pub fn numerical_rank(a: &SymMatrix, rank_tol: f64) -> usize {
    let eig = sym_eigen(a);
    let cutoff = rank_tol * eig.max_value();
    eig.values
        .iter()
        .filter(|&&l| l > cutoff && l > 0.0)
        .count()
}

/// Orthonormal basis of the range of a PSD matrix.
pub fn range_basis(a: &SymMatrix, rank_tol: f64) -> Result<Vec<Vec<f64>>> {
    let eig = checked_psd_eigen(a)?;
    let cutoff = rank_tol * eig.max_value();
    Ok(eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > cutoff && l > 0.0)
        .map(|(k, _)| eig.vectors.column(k))
        .collect())
}

/// `Id - θθᵀ` for a unit vector θ.
pub fn projector_complement(theta: &[f64]) -> Result<SymMatrix> {
    let n = norm(theta);
    if n.is_nan() || (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm: n });
    }
    let d = theta.len();
    Ok(SymMatrix::from_upper_fn(d, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - theta[i] * theta[j]
    }))
}

/// `Id - Σ uuᵀ` over an orthonormal family, i.e. the projector onto its
/// orthogonal complement.
pub fn projector_complement_of(dim: usize, basis: &[Vec<f64>]) -> Result<SymMatrix> {
    check_orthonormal(dim, basis)?;
    Ok(SymMatrix::from_upper_fn(dim, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - basis.iter().map(|u| u[i] * u[j]).sum::<f64>()
    }))
}

pub fn check_orthonormal(dim: usize, basis: &[Vec<f64>]) -> Result<()> {
    let mut deviation: f64 = 0.0;
    for (a, u) in basis.iter().enumerate() {
        if u.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: u.len(),
            });
        }
        for (b, w) in basis.iter().enumerate().skip(a) {
            let target = if a == b { 1.0 } else { 0.0 };
            deviation = deviation.max((dot(u, w) - target).abs());
        }
    }
    if deviation > ORTHONORMAL_TOL || deviation.is_nan() {
        return Err(Error::BasisNotOrthonormal { deviation });
    }
    Ok(())
}

/// Cosines of the principal angles between two subspaces, with the matching
/// principal directions expressed in coordinates of the first basis.
#[derive(Debug, Clone)]
pub struct PrincipalAngles {
    /// Descending.
    pub cosines: Vec<f64>,
    /// Column `k` holds the coefficients (w.r.t. `basis_u`) of the direction
    /// attaining `cosines[k]`.
    pub directions: Matrix,
}

pub fn principal_angles(basis_u: &[Vec<f64>], basis_v: &[Vec<f64>]) -> Result<PrincipalAngles> {
    let dim = basis_u.first().or(basis_v.first()).map_or(0, Vec::len);
    check_orthonormal(dim, basis_u)?;
    check_orthonormal(dim, basis_v)?;
    let ku = basis_u.len();
    // C Cᵀ with C = UᵀV, a ku × ku PSD matrix of squared cosines.
    let cross: Vec<Vec<f64>> = basis_u
        .iter()
        .map(|u| basis_v.iter().map(|v| dot(u, v)).collect())
        .collect();
    let gram = SymMatrix::from_upper_fn(ku, |a, b| dot(&cross[a], &cross[b]));
    let eig = sym_eigen(&gram);
    let mut cosines = Vec::with_capacity(ku);
    let mut directions = Matrix::zeros(ku, ku);
    for (col, k) in (0..ku).rev().enumerate() {
        cosines.push(eig.values[k].max(0.0).sqrt());
        for r in 0..ku {
            directions[(r, col)] = eig.vectors[(r, k)];
        }
    }
    Ok(PrincipalAngles {
        cosines,
        directions,
    })
}

/// `dim(span(U) ∩ span(V))` for orthonormal bases, counted as principal
/// angles equal to zero within [`ANGLE_TOL`].
pub fn subspace_intersection_dim(basis_u: &[Vec<f64>], basis_v: &[Vec<f64>]) -> Result<usize> {
    // Work on the smaller side; the nonzero cosines coincide.
    let angles = if basis_u.len() <= basis_v.len() {
        principal_angles(basis_u, basis_v)?
    } else {
        principal_angles(basis_v, basis_u)?
    };
    Ok(angles
        .cosines
        .iter()
        .filter(|&&c| c > 1.0 - ANGLE_TOL)
        .count())
}

pub fn standard_basis(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}
