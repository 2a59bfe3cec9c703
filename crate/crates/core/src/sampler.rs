//! Seeded generation of Gaussian vectors, sphere points, Haar rotations and
//! sample batches `Y_i = A^{1/2} X_i`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{determinant, dot, householder_qr, norm, sym_sqrt, Matrix, SymMatrix};
use crate::rng::RngStream;

const SPHERE_RETRIES: usize = 100;

/// Which covariance ensemble a batch was drawn from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleTag {
    /// `A = Id`.
    FullRank,
    /// `A` projects onto the orthogonal complement of `span(normals)`.
    DeficientProjection {
        k: usize,
        normals: Vec<Vec<f64>>,
    },
    ExplicitCovariance {
        rows: Vec<Vec<f64>>,
    },
}

/// `count` vectors in `R^dim`, with the ensemble and stream they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    pub tag: EnsembleTag,
    pub seed: u64,
    pub stream_id: u64,
}

impl SampleBatch {
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>, tag: EnsembleTag) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::invalid(
                "sample batch must contain at least one vector",
            ));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        Ok(Self {
            dim,
            vectors,
            tag,
            seed: 0,
            stream_id: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Applies the linear map `t` to every vector.
    pub fn rotated(&self, t: &Matrix) -> Result<SampleBatch> {
        if t.rows() != self.dim || t.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: t.rows(),
            });
        }
        let vectors = self
            .vectors
            .iter()
            .map(|v| t.mul_vec(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(SampleBatch {
            vectors,
            ..self.clone()
        })
    }

    fn with_provenance(mut self, rng: &RngStream) -> Self {
        self.seed = rng.seed();
        self.stream_id = rng.stream_id();
        self
    }
}

pub fn gaussian_vector(d: usize, rng: &mut RngStream) -> Vec<f64> {
    let mut v = vec![0.0; d];
    rng.fill_normal(&mut v);
    v
}

/// Uniform point on the unit sphere in `R^d` (normalized Gaussian).
pub fn uniform_sphere(d: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if d < 2 {
        return Err(Error::invalid(format!(
            "sphere dimension must be >= 2, got {d}"
        )));
    }
    let mut v = vec![0.0; d];
    for _ in 0..SPHERE_RETRIES {
        rng.fill_normal(&mut v);
        let n = norm(&v);
        if n > 1e-150 && n.is_finite() {
            v.iter_mut().for_each(|x| *x /= n);
            return Ok(v);
        }
    }
    Err(Error::DegenerateDraw {
        attempts: SPHERE_RETRIES,
    })
}

/// Haar-distributed rotation in `SO(d)`: QR of a Gaussian matrix with the
/// columns of `Q` rescaled by `sign(R_ii)`, then one column negated if the
/// determinant came out as -1.
pub fn haar_rotation(d: usize, rng: &mut RngStream) -> Result<Matrix> {
    if d < 2 {
        return Err(Error::invalid(format!(
            "rotation dimension must be >= 2, got {d}"
        )));
    }
    let mut z = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            z[(i, j)] = rng.standard_normal();
        }
    }
    let (mut q, r) = householder_qr(&z);
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if determinant(&q) < 0.0 {
        for i in 0..d {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    Ok(q)
}

/// `k` orthonormal vectors spanning a uniformly random `k`-dimensional
/// subspace: sphere draws orthonormalized by Gram–Schmidt (with one
/// reorthogonalization pass).
pub fn random_frame(d: usize, k: usize, rng: &mut RngStream) -> Result<Vec<Vec<f64>>> {
    if k >= d {
        return Err(Error::invalid(format!(
            "frame size k={k} must be below d={d}"
        )));
    }
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(k);
    while frame.len() < k {
        let mut v = uniform_sphere(d, rng)?;
        for _ in 0..2 {
            for u in &frame {
                let c = dot(u, &v);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = norm(&v);
        if n < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= n);
        frame.push(v);
    }
    Ok(frame)
}

/// `n` draws of `A^{1/2} X` for an explicit PSD covariance.
pub fn sample_batch(cov: &SymMatrix, n: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let root = sym_sqrt(cov)?;
    let tag = EnsembleTag::ExplicitCovariance {
        rows: cov.to_rows(),
    };
    sample_batch_with_root(&root, n, tag, rng)
}

/// Same as [`sample_batch`] with a precomputed square root.
pub fn sample_batch_with_root(
    root: &SymMatrix,
    n: usize,
    tag: EnsembleTag,
    rng: &mut RngStream,
) -> Result<SampleBatch> {
    let d = root.dim();
    let provenance = rng.clone();
    let mut x = vec![0.0; d];
    let vectors = (0..n)
        .map(|_| {
            rng.fill_normal(&mut x);
            let mut y = vec![0.0; d];
            root.as_matrix().mul_vec_into(&x, &mut y);
            y
        })
        .collect();
    Ok(SampleBatch::new(d, vectors, tag)?.with_provenance(&provenance))
}

/// `n` standard Gaussian vectors (`A = Id`).
pub fn full_rank_batch(d: usize, n: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let provenance = rng.clone();
    let vectors = (0..n).map(|_| gaussian_vector(d, rng)).collect();
    Ok(SampleBatch::new(d, vectors, EnsembleTag::FullRank)?.with_provenance(&provenance))
}

/// Batch from `A = Proj` onto the complement of `span(normals)`. A projector
/// is its own square root, so `Y = X − Σ ⟨u, X⟩ u`.
pub fn projected_batch(
    d: usize,
    normals: Vec<Vec<f64>>,
    n: usize,
    rng: &mut RngStream,
) -> Result<SampleBatch> {
    crate::matcore::check_orthonormal(d, &normals)?;
    let provenance = rng.clone();
    let vectors = (0..n)
        .map(|_| {
            let mut y = gaussian_vector(d, rng);
            for u in &normals {
                let c = dot(u, &y);
                y.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
            y
        })
        .collect();
    let tag = EnsembleTag::DeficientProjection {
        k: normals.len(),
        normals,
    };
    Ok(SampleBatch::new(d, vectors, tag)?.with_provenance(&provenance))
}

/// Batch from the `DeficientProjection(k)` ensemble: a fresh uniformly random
/// `k`-dimensional subspace is removed, then `n` samples are drawn.
pub fn deficient_batch(d: usize, k: usize, n: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let normals = random_frame(d, k, rng)?;
    projected_batch(d, normals, n, rng)
}
