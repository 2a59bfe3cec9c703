//! Conditional correlations `α_{i,j}` and the covariance of the plane section
//! `A^{1/2} B_d ∩ E` with `E = span(e₁, e₂)`.
//!
//! Coordinate indices are zero-based throughout.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    dot, principal_angles, pseudo_inverse, range_basis, standard_basis, subspace_intersection_dim,
    sym_sqrt, Cholesky, SymMatrix, DEFAULT_RANK_TOL,
};
use crate::rng::RngStream;
use crate::stats::{run_chunks, Merge, Moments};

/// Largest dimension accepted by [`alpha_monte_carlo`]; the acceptance rate
/// decays like `ε^{d−2}`.
pub const MC_MAX_DIM: usize = 6;
pub const MIN_ACCEPTED: u64 = 1000;
/// A 2×2 block with `|det| <= SINGULAR_TOL · max|entry|²` is singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// The 2×2 matrix `[[α_ii, α_ij], [α_ij, α_jj]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaMatrix {
    pub pair: (usize, usize),
    pub values: [[f64; 2]; 2],
}

impl AlphaMatrix {
    pub fn as_sym(&self) -> SymMatrix {
        let v = self.values;
        SymMatrix::from_row_slice(2, &[v[0][0], v[0][1], v[1][0], v[1][1]])
            .expect("2x2 from four entries")
    }

    pub fn max_abs_diff(&self, other: &[[f64; 2]; 2]) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.iter().flatten())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn check_pair(dim: usize, i: usize, j: usize) -> Result<()> {
    for index in [i, j] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    if i == j {
        return Err(Error::invalid(format!(
            "indices must differ, got i = j = {i}"
        )));
    }
    Ok(())
}

fn sym2(a: f64, b: f64, c: f64) -> [[f64; 2]; 2] {
    [[a, b], [b, c]]
}

/// Rows/columns `{i, j}` of `A⁻¹`, from two Cholesky solves.
pub fn precision_block(a: &SymMatrix, i: usize, j: usize) -> Result<[[f64; 2]; 2]> {
    check_pair(a.dim(), i, j)?;
    let chol = Cholesky::new(a)?;
    let xi = chol.solve(&standard_basis(a.dim(), i))?;
    let xj = chol.solve(&standard_basis(a.dim(), j))?;
    Ok(sym2(xi[i], 0.5 * (xi[j] + xj[i]), xj[j]))
}

fn invert2(m: [[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
    if det.is_nan() || det.abs() <= SINGULAR_TOL * scale * scale {
        return Err(Error::SingularBlock { det });
    }
    Ok(sym2(m[1][1] / det, -m[0][1] / det, m[0][0] / det))
}

/// `α` as the inverse of the 2×2 precision block.
pub fn alpha_analytic(a: &SymMatrix, i: usize, j: usize) -> Result<AlphaMatrix> {
    let block = precision_block(a, i, j)?;
    Ok(AlphaMatrix {
        pair: (i, j),
        values: invert2(block)?,
    })
}

/// `A_EE − A_ER A_RR⁻¹ A_RE` with `E = {i, j}` and `R` the other indices.
pub fn schur_conditional_covariance(a: &SymMatrix, i: usize, j: usize) -> Result<[[f64; 2]; 2]> {
    let d = a.dim();
    check_pair(d, i, j)?;
    let rest: Vec<usize> = (0..d).filter(|&k| k != i && k != j).collect();
    let mut out = sym2(a.get(i, i), a.get(i, j), a.get(j, j));
    if rest.is_empty() {
        return Ok(out);
    }
    let chol = Cholesky::new(&a.submatrix(&rest)?)?;
    let col = |e: usize| rest.iter().map(|&k| a.get(k, e)).collect::<Vec<f64>>();
    let (bi, bj) = (col(i), col(j));
    let (si, sj) = (chol.solve(&bi)?, chol.solve(&bj)?);
    out[0][0] -= dot(&bi, &si);
    out[1][1] -= dot(&bj, &sj);
    let off = 0.5 * (dot(&bi, &sj) + dot(&bj, &si));
    out[0][1] -= off;
    out[1][0] -= off;
    Ok(out)
}

/// Rejection-sampling estimate of `α` at slab half-width `ε`.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaEstimate {
    pub alpha: AlphaMatrix,
    pub epsilon: f64,
    /// Standard errors aligned with `alpha.values`.
    pub standard_errors: [[f64; 2]; 2],
    pub accepted: u64,
    pub proposals: u64,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct SlabAccumulator {
    /// `Y_i²`, `Y_i Y_j`, `Y_j²` over accepted draws.
    products: [Moments; 3],
}

impl Merge for SlabAccumulator {
    fn merge(&mut self, o: &Self) {
        self.products.merge(&o.products);
    }
}

/// Draws `Y = A^{1/2} X` and keeps those with `|Y_k| < ε` for every
/// `k ∉ {i, j}`, averaging `Y_i²`, `Y_i Y_j`, `Y_j²` over the kept draws.
pub fn alpha_monte_carlo(
    a: &SymMatrix,
    i: usize,
    j: usize,
    epsilon: f64,
    trials: u64,
    rng: &RngStream,
) -> Result<AlphaEstimate> {
    let d = a.dim();
    check_pair(d, i, j)?;
    if d > MC_MAX_DIM {
        return Err(Error::invalid(format!(
            "rejection sampling supports d <= {MC_MAX_DIM}, got d={d}"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Cholesky::new(a)?;
    let root = sym_sqrt(a)?;
    let rows: Vec<Vec<f64>> = (0..d).map(|r| root.as_matrix().row(r).to_vec()).collect();
    let rest: Vec<&[f64]> = (0..d)
        .filter(|&k| k != i && k != j)
        .map(|k| rows[k].as_slice())
        .collect();
    let (ri, rj) = (rows[i].as_slice(), rows[j].as_slice());

    let acc: SlabAccumulator = run_chunks(trials, rng, |r, count| {
        let mut acc = SlabAccumulator::default();
        let mut x = [0.0; MC_MAX_DIM];
        let x = &mut x[..d];
        for _ in 0..count {
            r.fill_normal(x);
            if rest.iter().all(|row| dot(row, x).abs() < epsilon) {
                let (yi, yj) = (dot(ri, x), dot(rj, x));
                acc.products[0].push(yi * yi);
                acc.products[1].push(yi * yj);
                acc.products[2].push(yj * yj);
            }
        }
        acc
    });

    let accepted = acc.products[0].count();
    if accepted < MIN_ACCEPTED {
        return Err(Error::TooFewAcceptances {
            accepted,
            required: MIN_ACCEPTED,
        });
    }
    let [m11, m12, m22] = acc.products;
    Ok(AlphaEstimate {
        alpha: AlphaMatrix {
            pair: (i, j),
            values: sym2(m11.mean(), m12.mean(), m22.mean()),
        },
        epsilon,
        standard_errors: sym2(m11.std_error(), m12.std_error(), m22.std_error()),
        accepted,
        proposals: trials,
        acceptance_rate: accepted as f64 / trials as f64,
    })
}

/// Covariance of the uniform law on the solid section `A^{1/2} B_d ∩ E`,
/// in the coordinates `(x₁, x₂)` of `E`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionCovariance {
    pub matrix: [[f64; 2]; 2],
    /// `dim(E ∩ range(A))`.
    pub rank: usize,
}

/// Section covariance by cases on `r = dim(E ∩ range(A))`:
/// `r = 2` gives `M⁻¹/4` with `M = (A⁺)_EE`; `r = 1` gives `(L²/3) v vᵀ` for
/// the unit direction `v` of the segment and half-length `L = (vᵀA⁺v)^{−1/2}`;
/// `r = 0` gives zero.
pub fn section_covariance(a: &SymMatrix) -> Result<SectionCovariance> {
    let d = a.dim();
    if d < 2 {
        return Err(Error::invalid(format!("section needs d >= 2, got d={d}")));
    }
    let pinv = pseudo_inverse(a, DEFAULT_RANK_TOL)?;
    let range = range_basis(a, DEFAULT_RANK_TOL)?;
    let plane = vec![standard_basis(d, 0), standard_basis(d, 1)];
    let rank = if range.is_empty() {
        0
    } else {
        subspace_intersection_dim(&plane, &range)?
    };
    let matrix = match rank {
        2 => {
            let m = invert2(sym2(pinv.get(0, 0), pinv.get(0, 1), pinv.get(1, 1)))?;
            m.map(|row| row.map(|x| 0.25 * x))
        }
        1 => {
            let angles = principal_angles(&plane, &range)?;
            let v = [angles.directions[(0, 0)], angles.directions[(1, 0)]];
            let q = v[0] * v[0] * pinv.get(0, 0)
                + 2.0 * v[0] * v[1] * pinv.get(0, 1)
                + v[1] * v[1] * pinv.get(1, 1);
            let half_len_sq = 1.0 / q;
            let s = half_len_sq / 3.0;
            sym2(s * v[0] * v[0], s * v[0] * v[1], s * v[1] * v[1])
        }
        _ => [[0.0; 2]; 2],
    };
    Ok(SectionCovariance { matrix, rank })
}

/// `α₁₁ / (C_E)₁₁` at `A = Id_d`.
pub fn kd_constant(d: usize) -> Result<f64> {
    if d < 3 {
        return Err(Error::invalid(format!("K_d needs d >= 3, got d={d}")));
    }
    let id = SymMatrix::identity(d);
    let alpha = alpha_analytic(&id, 0, 1)?;
    let section = section_covariance(&id)?;
    Ok(alpha.values[0][0] / section.matrix[0][0])
}
