//! The identity-covariance Wishart law `W_n(Id, p)`: Gram matrices, the
//! density on the PSD cone, its normalizer, determinant moments and sampling.
//!
//! Densities are taken with respect to Lebesgue measure on the `n(n+1)/2`
//! upper-triangle coordinates. Everything is evaluated in log space.

use std::f64::consts::{LN_2, PI};

use libm::lgamma as ln_gamma;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{determinant, dot, psd_certificate, Cholesky, SymMatrix};
use crate::rng::RngStream;
use crate::sampler::SampleBatch;

/// Matrix dimension `n` and degrees of freedom `p`, with `1 <= n <= p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WishartParams {
    n: usize,
    p: usize,
}

impl WishartParams {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if n == 0 || n > p {
            return Err(Error::invalid(format!(
                "Wishart parameters need 1 <= n <= p, got n={n}, p={p}"
            )));
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }
}

/// An `n × n` PSD matrix of pairwise inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(SymMatrix);

impl GramMatrix {
    /// Wraps a matrix after checking it is PSD within tolerance.
    pub fn from_sym(m: SymMatrix) -> Result<Self> {
        let cert = psd_certificate(&m);
        if !cert.is_psd() {
            return Err(Error::NotPsd {
                min_eigenvalue: cert.min_eigenvalue,
                tolerance: cert.tolerance,
            });
        }
        Ok(GramMatrix(m))
    }

    pub fn of_vectors(vectors: &[Vec<f64>]) -> Self {
        GramMatrix(SymMatrix::from_upper_fn(vectors.len(), |i, j| {
            dot(&vectors[i], &vectors[j])
        }))
    }

    pub fn n(&self) -> usize {
        self.0.dim()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Determinant by pivoted elimination; zero for singular matrices.
    pub fn det(&self) -> f64 {
        determinant(self.0.as_matrix())
    }

    pub fn logdet(&self) -> Result<f64> {
        Ok(Cholesky::new(&self.0)?.logdet())
    }
}

pub fn gram(batch: &SampleBatch) -> GramMatrix {
    GramMatrix::of_vectors(batch.vectors())
}

/// `log Z(n,p) = (pn/2) log 2 + (n(n-1)/4) log π + Σ_{i=1}^{n} log Γ((p+1-i)/2)`.
pub fn log_normalizer(params: WishartParams) -> f64 {
    let (n, p) = (params.n as f64, params.p as f64);
    let gammas: f64 = (1..=params.n)
        .map(|i| ln_gamma((p + 1.0 - i as f64) / 2.0))
        .sum();
    0.5 * p * n * LN_2 + 0.25 * n * (n - 1.0) * PI.ln() + gammas
}

/// Log density from precomputed `log det(g)` and `trace(g)`.
pub fn log_density_parts(params: WishartParams, logdet: f64, trace: f64) -> f64 {
    let exponent = 0.5 * (params.p as f64 - params.n as f64 - 1.0);
    // det^0 is 1 even on the boundary.
    let det_term = if exponent == 0.0 {
        0.0
    } else {
        exponent * logdet
    };
    det_term - 0.5 * trace - log_normalizer(params)
}

/// `log f_{n,p}(g) = ((p-n-1)/2) log det g − trace(g)/2 − log Z(n,p)`.
pub fn log_density(params: WishartParams, g: &GramMatrix) -> Result<f64> {
    if g.n() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            found: g.n(),
        });
    }
    let logdet = g.logdet()?;
    Ok(log_density_parts(params, logdet, g.trace()))
}

/// Mean and variance of `det(W)` for `W ~ W_n(Id, p)`, held in log form so
/// large `p` does not overflow.
///
/// `E det = p!/(p-n)!` and `Var det = E det · ((p+2)!/(p+2-n)! − E det)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetMoments {
    pub log_mean: f64,
    pub log_variance: f64,
    /// `Var / mean²`, computed without cancellation.
    pub relative_variance: f64,
}

impl DetMoments {
    pub fn mean(&self) -> f64 {
        self.log_mean.exp()
    }

    pub fn variance(&self) -> f64 {
        self.log_variance.exp()
    }
}

pub fn det_moments(params: WishartParams) -> DetMoments {
    let p = params.p as f64;
    // log of the falling factorial p (p-1) ... (p-n+1)
    let log_mean: f64 = (0..params.n).map(|i| (p - i as f64).ln()).sum();
    // (p+2)!/(p+2-n)! over p!/(p-n)! telescopes to Π (p+2-i)/(p-i).
    let log_ratio: f64 = (0..params.n).map(|i| (2.0 / (p - i as f64)).ln_1p()).sum();
    let relative_variance = log_ratio.exp_m1();
    DetMoments {
        log_mean,
        log_variance: 2.0 * log_mean + relative_variance.ln(),
        relative_variance,
    }
}

/// Gram matrix of `n` independent standard Gaussian vectors in `R^p`.
pub fn wishart_sample(params: WishartParams, rng: &mut RngStream) -> GramMatrix {
    let vectors: Vec<Vec<f64>> = (0..params.n)
        .map(|_| {
            let mut v = vec![0.0; params.p];
            rng.fill_normal(&mut v);
            v
        })
        .collect();
    GramMatrix::of_vectors(&vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::EnsembleTag;

    fn params(n: usize, p: usize) -> WishartParams {
        WishartParams::new(n, p).unwrap()
    }

    #[test]
    fn rejects_n_above_p() {
        assert!(WishartParams::new(3, 2).is_err());
        assert!(WishartParams::new(0, 2).is_err());
    }

    #[test]
    fn gram_examples() {
        let b = SampleBatch::new(
            3,
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            EnsembleTag::FullRank,
        )
        .unwrap();
        assert_eq!(gram(&b).as_sym(), &SymMatrix::identity(2));
        let b = SampleBatch::new(2, vec![vec![3.0, 4.0]], EnsembleTag::FullRank).unwrap();
        assert_eq!(gram(&b).as_sym().get(0, 0), 25.0);
    }

    #[test]
    fn normalizer_small_cases() {
        // Z(1,2) = 2 Γ(1) = 2
        assert!((log_normalizer(params(1, 2)) - LN_2).abs() < 1e-15);
        // Z(1,p) = 2^{p/2} Γ(p/2)
        for p in 1..30 {
            let want = 0.5 * p as f64 * LN_2 + ln_gamma(p as f64 / 2.0);
            assert!((log_normalizer(params(1, p)) - want).abs() < 1e-12);
        }
        // Z(2,3) = 2^3 π^{1/2} Γ(3/2) Γ(1)
        let want = 3.0 * LN_2 + 0.5 * PI.ln() + ln_gamma(1.5);
        assert!((log_normalizer(params(2, 3)) - want).abs() < 1e-14);
    }

    #[test]
    fn density_matches_chi_square() {
        let g = GramMatrix::from_sym(SymMatrix::diag(&[2.0])).unwrap();
        let ld = log_density(params(1, 2), &g).unwrap();
        assert!((ld - ((-1.0f64).exp() / 2.0).ln()).abs() < 1e-14);
        assert!((ld + 1.6931).abs() < 1e-4);
        let ld4 = log_density(params(1, 4), &g).unwrap();
        assert!((ld4 - (2.0 * (-1.0f64).exp() / 4.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn density_at_identity() {
        let g = GramMatrix::from_sym(SymMatrix::identity(2)).unwrap();
        for p in 2..10 {
            let ld = log_density(params(2, p), &g).unwrap();
            assert!((ld - (-1.0 - log_normalizer(params(2, p)))).abs() < 1e-14);
        }
    }

    #[test]
    fn density_rejects_singular_and_wrong_size() {
        let g = GramMatrix::from_sym(SymMatrix::diag(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            log_density(params(2, 4), &g),
            Err(Error::NotPd { .. })
        ));
        let g = GramMatrix::from_sym(SymMatrix::identity(3)).unwrap();
        assert!(log_density(params(2, 4), &g).is_err());
    }

    #[test]
    fn det_moment_formulas() {
        for p in 1..40 {
            let m = det_moments(params(1, p));
            assert!((m.mean() - p as f64).abs() < 1e-12 * p as f64);
            assert!((m.variance() - 2.0 * p as f64).abs() < 1e-11 * p as f64);
        }
        let m = det_moments(params(2, 4));
        assert!((m.mean() - 12.0).abs() < 1e-12);
        assert!((m.variance() - 216.0).abs() < 1e-10);
        // n = p gives p!
        let m = det_moments(params(5, 5));
        assert!((m.mean() - 120.0).abs() < 1e-10);
    }

    #[test]
    fn det_moments_do_not_overflow() {
        let m = det_moments(params(150, 299));
        assert!(m.log_mean.is_finite() && m.log_variance.is_finite());
        assert!(m.relative_variance.is_finite() && m.relative_variance > 0.0);
    }

    #[test]
    fn samples_are_psd() {
        let mut rng = RngStream::new(4, 4);
        for (n, p) in [(1, 1), (2, 2), (3, 5), (4, 12)] {
            for _ in 0..50 {
                let g = wishart_sample(params(n, p), &mut rng);
                assert!(psd_certificate(g.as_sym()).is_psd());
            }
        }
    }
}
