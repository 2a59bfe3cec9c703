//! Total variation between `W_n(Id, d-1)` and `W_n(Id, d)`.
//!
//! Three levels are provided: a Monte Carlo estimate of the exact integral
//! `½ E_{d-1} |1 − det(G)^{1/2} Z(n,d-1)/Z(n,d)|`, its Cauchy–Schwarz
//! relaxation `½ sd(det^{1/2}) / E det^{1/2}`, and the moment bound
//! `½ sd(det) / E det`, which has the closed form
//! `½ √(d(d+1) / ((d−n)(d−n+1)) − 1)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::chi_square_tv;
use crate::rng::RngStream;
use crate::stats::{run_chunks, McEstimate, Merge, Moments};
use crate::wishart::{det_moments, log_normalizer, wishart_sample, WishartParams};

/// Minimum Monte Carlo sample size accepted by the estimators.
pub const MIN_TRIALS: u64 = 10_000;
/// Slack, in standard errors, on stochastic inequality checks.
pub const SE_SLACK: f64 = 3.0;

fn check_nd(n: usize, d: usize) -> Result<()> {
    if n == 0 || n >= d {
        return Err(Error::invalid(format!("need 1 <= n < d, got n={n}, d={d}")));
    }
    Ok(())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::invalid(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    Ok(())
}

/// `½ √(d(d+1) / ((d−n)(d−n+1)) − 1)`.
pub fn tv_closed_form_bound(n: usize, d: usize) -> Result<f64> {
    check_nd(n, d)?;
    let (n, d) = (n as f64, d as f64);
    // d(d+1) − (d−n)(d−n+1) = n(2d − n + 1), exact in floating point here.
    let excess = n * (2.0 * d - n + 1.0) / ((d - n) * (d - n + 1.0));
    Ok(0.5 * excess.sqrt())
}

/// `½ √Var[det W] / E[det W]` for `W ~ W_n(Id, d−1)`, from the determinant
/// moment formulas.
pub fn tv_moment_ratio_bound(n: usize, d: usize) -> Result<f64> {
    check_nd(n, d)?;
    let m = det_moments(WishartParams::new(n, d - 1)?);
    Ok(0.5 * m.relative_variance.sqrt())
}

/// `log Z(n,d−1) − log Z(n,d)`.
fn log_z_ratio(n: usize, d: usize) -> Result<f64> {
    Ok(log_normalizer(WishartParams::new(n, d - 1)?) - log_normalizer(WishartParams::new(n, d)?))
}

/// `E[det(W)^{1/2}]` under `W_n(Id, d−1)`, equal to `Z(n,d)/Z(n,d−1)`.
pub fn mean_sqrt_det(n: usize, d: usize) -> Result<f64> {
    check_nd(n, d)?;
    Ok((-log_z_ratio(n, d)?).exp())
}

/// `½ sd(det^{1/2}) / E det^{1/2}` under `W_n(Id, d−1)`, evaluated exactly
/// from `E det` and `E det^{1/2}`.
pub fn sqrt_moment_ratio_exact(n: usize, d: usize) -> Result<f64> {
    check_nd(n, d)?;
    let m = det_moments(WishartParams::new(n, d - 1)?);
    // E det / (E det^{1/2})² − 1
    let excess = (m.log_mean + 2.0 * log_z_ratio(n, d)?).exp_m1();
    Ok(0.5 * excess.max(0.0).sqrt())
}

/// Running sums for the three links of the relaxation chain, fed with
/// determinants drawn from `W_n(Id, d−1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChainAccumulator {
    /// `½ |1 − det^{1/2} · Z(n,d−1)/Z(n,d)|`
    pub tv_term: Moments,
    /// `det^{1/2}`
    pub root: Moments,
    pub det: Moments,
}

impl ChainAccumulator {
    #[inline]
    pub fn push(&mut self, det: f64, log_z_ratio: f64) {
        let det = det.max(0.0);
        let root = det.sqrt();
        let weight = if root > 0.0 {
            (root.ln() + log_z_ratio).exp()
        } else {
            0.0
        };
        self.tv_term.push(0.5 * (1.0 - weight).abs());
        self.root.push(root);
        self.det.push(det);
    }

    /// `(TV estimate, ½ sd(√det)/E√det, ½ sd(det)/E det)` from the samples.
    pub fn triple(&self) -> [f64; 3] {
        let cv = |m: &Moments| {
            if m.mean() == 0.0 {
                0.0
            } else {
                0.5 * m.std_dev() / m.mean()
            }
        };
        [self.tv_term.mean(), cv(&self.root), cv(&self.det)]
    }

    /// Delta-method standard error of `½ sd(√det)/E√det`.
    pub fn root_ratio_std_error(&self) -> f64 {
        let r = &self.root;
        let n = r.count() as f64;
        let m = r.mean();
        let var = r.variance();
        if n < 2.0 || var == 0.0 || m == 0.0 {
            return 0.0;
        }
        let mu3 = r.third_central();
        let mu4 = r.fourth_central();
        let v =
            (var * var / m.powi(4) + (mu4 - var * var) / (4.0 * m * m * var) - mu3 / m.powi(3)) / n;
        0.5 * v.max(0.0).sqrt()
    }
}

impl Merge for ChainAccumulator {
    fn merge(&mut self, o: &Self) {
        self.tv_term.merge(&o.tv_term);
        self.root.merge(&o.root);
        self.det.merge(&o.det);
    }
}

fn accumulate_chain(n: usize, d: usize, trials: u64, rng: &RngStream) -> Result<ChainAccumulator> {
    let params = WishartParams::new(n, d - 1)?;
    let lzr = log_z_ratio(n, d)?;
    Ok(run_chunks(trials, rng, |r, count| {
        let mut acc = ChainAccumulator::default();
        for _ in 0..count {
            let g = wishart_sample(params, r);
            acc.push(g.det(), lzr);
        }
        acc
    }))
}

/// Monte Carlo estimate of the exact TV integral under `μ_{n,d−1}`.
pub fn tv_exact_mc(n: usize, d: usize, trials: u64, rng: &RngStream) -> Result<McEstimate> {
    check_nd(n, d)?;
    check_trials(trials)?;
    Ok(accumulate_chain(n, d, trials, rng)?.tv_term.estimate())
}

/// The same distance estimated under `μ_{n,d}`:
/// `½ E_d |1 − det^{−1/2} · Z(n,d)/Z(n,d−1)|`.
pub fn tv_exact_mc_reversed(
    n: usize,
    d: usize,
    trials: u64,
    rng: &RngStream,
) -> Result<McEstimate> {
    check_nd(n, d)?;
    check_trials(trials)?;
    let params = WishartParams::new(n, d)?;
    let lzr = log_z_ratio(n, d)?;
    let acc: Moments = run_chunks(trials, rng, |r, count| {
        let mut m = Moments::new();
        for _ in 0..count {
            let det = wishart_sample(params, r).det();
            let w = if det > 0.0 {
                (-0.5 * det.ln() - lzr).exp()
            } else {
                f64::INFINITY
            };
            m.push(0.5 * (1.0 - w).abs());
        }
        m
    });
    Ok(acc.estimate())
}

/// Outcome of checking `TV ≤ ½ sd(√det)/E√det ≤ ½ sd(det)/E det`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChainCheck {
    pub tv_mc: f64,
    pub tv_standard_error: f64,
    pub sqrt_moment_ratio_mc: f64,
    pub sqrt_moment_ratio_standard_error: f64,
    pub sqrt_moment_ratio_exact: f64,
    pub moment_ratio_bound: f64,
    /// First link, with [`SE_SLACK`] combined standard errors.
    pub cauchy_schwarz_holds: bool,
    /// Second link, evaluated on exact moments.
    pub lyapunov_holds: bool,
}

impl ChainCheck {
    pub fn triple(&self) -> [f64; 3] {
        [
            self.tv_mc,
            self.sqrt_moment_ratio_mc,
            self.moment_ratio_bound,
        ]
    }

    pub fn holds(&self) -> bool {
        self.cauchy_schwarz_holds && self.lyapunov_holds
    }
}

pub fn lyapunov_chain_check(
    n: usize,
    d: usize,
    trials: u64,
    rng: &RngStream,
) -> Result<ChainCheck> {
    check_nd(n, d)?;
    check_trials(trials)?;
    let acc = accumulate_chain(n, d, trials, rng)?;
    let [tv, root_ratio, _] = acc.triple();
    let tv_se = acc.tv_term.std_error();
    let root_se = acc.root_ratio_std_error();
    let exact_mid = sqrt_moment_ratio_exact(n, d)?;
    let bound = tv_moment_ratio_bound(n, d)?;
    let slack = SE_SLACK * (tv_se * tv_se + root_se * root_se).sqrt();
    Ok(ChainCheck {
        tv_mc: tv,
        tv_standard_error: tv_se,
        sqrt_moment_ratio_mc: root_ratio,
        sqrt_moment_ratio_standard_error: root_se,
        sqrt_moment_ratio_exact: exact_mid,
        moment_ratio_bound: bound,
        cauchy_schwarz_holds: tv <= root_ratio + slack,
        lyapunov_holds: exact_mid <= bound * (1.0 + 1e-12),
    })
}

/// Everything known about `d_TV(W_n(Id,d−1), W_n(Id,d))` at one `(n, d)`.
#[derive(Debug, Clone, Serialize)]
pub struct TvReport {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub closed_form_bound: f64,
    pub moment_ratio_bound: f64,
    pub sqrt_moment_ratio_bound: f64,
    pub sqrt_moment_ratio_standard_error: f64,
    pub sqrt_moment_ratio_exact: f64,
    pub mc_estimate: f64,
    pub mc_standard_error: f64,
    pub samples_used: u64,
    /// One-dimensional quadrature value, available when `n = 1`.
    pub quadrature_value: Option<f64>,
    pub chain_ordered: bool,
}

pub fn tv_report(n: usize, d: usize, trials: u64, rng: &RngStream) -> Result<TvReport> {
    let chain = lyapunov_chain_check(n, d, trials, rng)?;
    let closed = tv_closed_form_bound(n, d)?;
    let quadrature_value = (n == 1).then(|| chi_square_tv(d - 1, d, 1e-8));
    Ok(TvReport {
        n,
        d,
        seed: rng.seed(),
        closed_form_bound: closed,
        moment_ratio_bound: chain.moment_ratio_bound,
        sqrt_moment_ratio_bound: chain.sqrt_moment_ratio_mc,
        sqrt_moment_ratio_standard_error: chain.sqrt_moment_ratio_standard_error,
        sqrt_moment_ratio_exact: chain.sqrt_moment_ratio_exact,
        mc_estimate: chain.tv_mc,
        mc_standard_error: chain.tv_standard_error,
        samples_used: trials,
        quadrature_value,
        chain_ordered: chain.holds() && (chain.moment_ratio_bound - closed).abs() <= 1e-12,
    })
}
