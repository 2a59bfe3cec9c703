//! Streaming moment accumulators and the chunked Monte Carlo driver.
//!
//! Trials are cut into fixed-size chunks; chunk `c` draws from
//! `rng.split(c)` and the per-chunk accumulators are merged in chunk order.
//! Results are therefore bit-identical for any rayon thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::rng::RngStream;

/// Trials per chunk of parallel work.
pub const CHUNK_TRIALS: u64 = 2048;

pub trait Merge {
    fn merge(&mut self, other: &Self);
}

/// Running count, mean and central moments up to order four
/// (pairwise-combinable form of Welford's update).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.m2 / (self.n as f64 - 1.0)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    /// Population third central moment `μ₃`.
    pub fn third_central(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.m3 / self.n as f64
    }

    /// Population fourth central moment `μ₄`.
    pub fn fourth_central(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.m4 / self.n as f64
    }

    /// Large-sample standard error of [`Moments::variance`]:
    /// `sqrt((μ₄ − σ⁴) / n)`.
    pub fn variance_std_error(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        let n = self.n as f64;
        let mu4 = self.m4 / n;
        let s2 = self.m2 / n;
        ((mu4 - s2 * s2).max(0.0) / n).sqrt()
    }

    pub fn estimate(&self) -> McEstimate {
        McEstimate {
            estimate: self.mean(),
            standard_error: self.std_error(),
            samples: self.n,
        }
    }
}

impl Merge for Moments {
    fn merge(&mut self, o: &Self) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let na = self.n as f64;
        let nb = o.n as f64;
        let n = na + nb;
        let delta = o.mean - self.mean;
        let d2 = delta * delta;
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + o.m3
            + d2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * o.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + o.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * o.m3 - nb * self.m3) / n;
        self.mean += delta * nb / n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
        self.n += o.n;
    }
}

impl<T: Merge, const N: usize> Merge for [T; N] {
    fn merge(&mut self, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}

impl<T: Merge + Clone> Merge for Vec<T> {
    fn merge(&mut self, other: &Self) {
        if self.is_empty() {
            self.extend_from_slice(other);
            return;
        }
        assert_eq!(self.len(), other.len());
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}

impl Merge for u64 {
    fn merge(&mut self, other: &Self) {
        *self += other;
    }
}

impl<A: Merge, B: Merge> Merge for (A, B) {
    fn merge(&mut self, other: &Self) {
        self.0.merge(&other.0);
        self.1.merge(&other.1);
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: u64,
}

/// Runs `trials` trials in chunks of [`CHUNK_TRIALS`].
///
/// `body(rng, count)` must perform `count` trials using only `rng` and return
/// their accumulator. Chunks run on the current rayon pool.
pub fn run_chunks<A, F>(trials: u64, rng: &RngStream, body: F) -> A
where
    A: Merge + Default + Send,
    F: Fn(&mut RngStream, u64) -> A + Sync,
{
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_TRIALS;
            let count = CHUNK_TRIALS.min(trials - start);
            let mut stream = rng.split(c);
            body(&mut stream, count)
        })
        .collect();
    let mut total = A::default();
    for p in &parts {
        total.merge(p);
    }
    total
}
