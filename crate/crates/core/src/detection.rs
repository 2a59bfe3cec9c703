//! Rank-detection games: ensembles with a known section rank, detectors that
//! map a sample batch to a guess in `{0, 1, 2}`, rotation symmetrization and
//! the Monte Carlo harnesses that score detectors against the TV ceiling.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::conditional::section_covariance;
use crate::error::{Error, Result};
use crate::matcore::{norm, Cholesky, Matrix, SymMatrix, UNIT_TOL};
use crate::rng::{mix64, RngStream};
use crate::sampler::{
    deficient_batch, full_rank_batch, haar_rotation, projected_batch, SampleBatch,
};
use crate::stats::run_chunks;
use crate::tvlab::tv_closed_form_bound;
use crate::wishart::{
    det_moments, gram, log_density_parts, log_normalizer, GramMatrix, WishartParams,
};

/// Minimum number of trials for a game.
pub const MIN_GAME_TRIALS: u64 = 10_000;
/// `|P_E θ|` at or below this counts as `θ ∈ E⊥`.
pub const E_PERP_TOL: f64 = 1e-8;
/// The success level in the non-existence statement.
pub const SUCCESS_LEVEL: f64 = 0.9;

/// Registry names, in report order.
pub const DETECTOR_NAMES: [&str; 6] = ["lr", "trace", "det", "always1", "always2", "random"];

/// Maps a batch to a rank guess. Implementations must be deterministic and
/// safe to call concurrently.
pub trait Detector: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, batch: &SampleBatch) -> u8;
}

/// `rank(C_E(A))` for a PSD covariance.
pub fn true_section_rank(a: &SymMatrix) -> Result<usize> {
    Ok(section_covariance(a)?.rank)
}

/// Bayes test between `W_n(Id, d)` (guess 2) and `W_n(Id, d−k)` (guess 1)
/// on the Gram matrix. Ties go to 2; a singular Gram matrix gives 1.
#[derive(Debug, Clone)]
pub struct LrDetector {
    full: WishartParams,
    deficient: WishartParams,
}

impl LrDetector {
    pub fn new(n: usize, d: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= d {
            return Err(Error::invalid(format!("need 1 <= k < d, got k={k}, d={d}")));
        }
        Ok(Self {
            full: WishartParams::new(n, d)?,
            deficient: WishartParams::new(n, d - k)?,
        })
    }

    /// `log f_{n,d}(G) − log f_{n,d−k}(G)`, or `None` if `G` is singular.
    pub fn log_ratio(&self, g: &GramMatrix) -> Option<f64> {
        let logdet = Cholesky::new(g.as_sym()).ok()?.logdet();
        let trace = g.trace();
        Some(
            log_density_parts(self.full, logdet, trace)
                - log_density_parts(self.deficient, logdet, trace),
        )
    }
}

impl Detector for LrDetector {
    fn name(&self) -> &str {
        "lr"
    }

    fn evaluate(&self, batch: &SampleBatch) -> u8 {
        match self.log_ratio(&gram(batch)) {
            Some(r) if r >= 0.0 => 2,
            _ => 1,
        }
    }
}

/// Guesses 2 when `trace(G)` exceeds a threshold.
#[derive(Debug, Clone)]
pub struct TraceDetector {
    pub threshold: f64,
}

impl TraceDetector {
    /// Threshold halfway between the two means `n·d` and `n·(d−k)`.
    pub fn midpoint(n: usize, d: usize, k: usize) -> Self {
        Self {
            threshold: n as f64 * (d as f64 - 0.5 * k as f64),
        }
    }
}

impl Detector for TraceDetector {
    fn name(&self) -> &str {
        "trace"
    }

    fn evaluate(&self, batch: &SampleBatch) -> u8 {
        if gram(batch).trace() > self.threshold {
            2
        } else {
            1
        }
    }
}

/// Guesses 2 when `det(G)` exceeds a threshold.
#[derive(Debug, Clone)]
pub struct DetDetector {
    pub threshold: f64,
}

impl DetDetector {
    /// Threshold halfway between `E det` under `W_n(Id,d)` and `W_n(Id,d−k)`.
    pub fn midpoint(n: usize, d: usize, k: usize) -> Result<Self> {
        let hi = det_moments(WishartParams::new(n, d)?).mean();
        let lo = det_moments(WishartParams::new(n, d - k)?).mean();
        Ok(Self {
            threshold: 0.5 * (hi + lo),
        })
    }
}

impl Detector for DetDetector {
    fn name(&self) -> &str {
        "det"
    }

    fn evaluate(&self, batch: &SampleBatch) -> u8 {
        if gram(batch).det() > self.threshold {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConstantDetector {
    guess: u8,
    name: String,
}

impl ConstantDetector {
    pub fn new(guess: u8) -> Self {
        Self {
            guess,
            name: format!("always{guess}"),
        }
    }
}

impl Detector for ConstantDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, _batch: &SampleBatch) -> u8 {
        self.guess
    }
}

/// Uniform guess over `choices` labels, keyed on the seed and the Gram trace
/// quantized to `1e-6`, so it is reproducible and a function of `G`.
/// Two choices give `{1, 2}`; three give `{0, 1, 2}`.
#[derive(Debug, Clone)]
pub struct RandomDetector {
    pub seed: u64,
    pub choices: u8,
}

impl Detector for RandomDetector {
    fn name(&self) -> &str {
        "random"
    }

    fn evaluate(&self, batch: &SampleBatch) -> u8 {
        let key = (gram(batch).trace() * 1e6).round() as i64 as u64;
        let h = mix64(self.seed ^ mix64(key));
        let pick = (h % self.choices as u64) as u8;
        if self.choices == 2 {
            pick + 1
        } else {
            pick
        }
    }
}

/// Guesses 2 when the first coordinate of the first sample is positive.
/// Not rotation invariant; used to exercise symmetrization.
#[derive(Debug, Clone, Default)]
pub struct FirstCoordinateSign;

impl Detector for FirstCoordinateSign {
    fn name(&self) -> &str {
        "first-coordinate-sign"
    }

    fn evaluate(&self, batch: &SampleBatch) -> u8 {
        if batch.vectors()[0][0] > 0.0 {
            2
        } else {
            1
        }
    }
}

/// Maximum-likelihood guess among `W_n(Id,d)` → 2, `W_n(Id,d−1)` → 1 and
/// `W_n(Id,d−2)` → 0. Ties go to the larger degrees of freedom.
#[derive(Debug, Clone)]
pub struct ThreeWayBayes {
    params: [WishartParams; 3],
    log_z: [f64; 3],
}

impl ThreeWayBayes {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::invalid(format!(
                "three-way game needs d >= 3, got d={d}"
            )));
        }
        let params = [
            WishartParams::new(n, d)?,
            WishartParams::new(n, d - 1)?,
            WishartParams::new(n, d - 2)?,
        ];
        Ok(Self {
            params,
            log_z: params.map(log_normalizer),
        })
    }
}

impl Detector for ThreeWayBayes {
    fn name(&self) -> &str {
        "bayes3"
    }

    fn evaluate(&self, batch: &SampleBatch) -> u8 {
        let g = gram(batch);
        let Ok(chol) = Cholesky::new(g.as_sym()) else {
            return 0;
        };
        let (logdet, trace) = (chol.logdet(), g.trace());
        let mut best = (f64::NEG_INFINITY, 0u8);
        for (idx, (p, _)) in self.params.iter().zip(&self.log_z).enumerate() {
            let ld = log_density_parts(*p, logdet, trace);
            if ld > best.0 {
                best = (ld, 2 - idx as u8);
            }
        }
        best.1
    }
}

/// Decision rule on the average guess: `≥ 3/2` → 2, `[1/2, 3/2)` → 1,
/// otherwise 0.
pub fn symmetrized_decision(mean: f64) -> u8 {
    if mean >= 1.5 {
        2
    } else if mean >= 0.5 {
        1
    } else {
        0
    }
}

/// `f` averaged over `m` fixed Haar rotations, then thresholded with
/// [`symmetrized_decision`]. Rotations are drawn lazily per dimension from
/// the detector's own seed.
pub struct SymmetrizedDetector {
    inner: Arc<dyn Detector>,
    rotations: usize,
    seed: u64,
    name: String,
    cache: Mutex<HashMap<usize, Arc<Vec<Matrix>>>>,
}

pub fn symmetrize_detector(
    f: Arc<dyn Detector>,
    rotations: usize,
    seed: u64,
) -> Result<SymmetrizedDetector> {
    if rotations == 0 {
        return Err(Error::invalid("need at least one rotation"));
    }
    Ok(SymmetrizedDetector {
        name: format!("sym({})", f.name()),
        inner: f,
        rotations,
        seed,
        cache: Mutex::new(HashMap::new()),
    })
}

impl SymmetrizedDetector {
    fn rotations_for(&self, d: usize) -> Arc<Vec<Matrix>> {
        let mut cache = self.cache.lock().expect("rotation cache poisoned");
        cache
            .entry(d)
            .or_insert_with(|| {
                let mut rng = RngStream::new(self.seed, 0).split(d as u64);
                let rots = (0..self.rotations)
                    .map(|_| haar_rotation(d, &mut rng).expect("d >= 2"))
                    .collect();
                Arc::new(rots)
            })
            .clone()
    }

    /// Average of the inner guesses over the rotated copies of `batch`.
    pub fn mean_guess(&self, batch: &SampleBatch) -> f64 {
        if batch.dim() < 2 {
            return self.inner.evaluate(batch) as f64;
        }
        let rots = self.rotations_for(batch.dim());
        let total: u32 = rots
            .iter()
            .map(|t| {
                let rotated = batch.rotated(t).expect("rotation matches batch dimension");
                self.inner.evaluate(&rotated) as u32
            })
            .sum();
        total as f64 / rots.len() as f64
    }
}

impl Detector for SymmetrizedDetector {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, batch: &SampleBatch) -> u8 {
        symmetrized_decision(self.mean_guess(batch))
    }
}

/// Builds the named registry detector for the two-way game `(n, d, k)`.
pub fn detector_by_name(
    name: &str,
    n: usize,
    d: usize,
    k: usize,
    seed: u64,
) -> Result<Box<dyn Detector>> {
    Ok(match name {
        "lr" => Box::new(LrDetector::new(n, d, k)?),
        "trace" => Box::new(TraceDetector::midpoint(n, d, k)),
        "det" => Box::new(DetDetector::midpoint(n, d, k)?),
        "always1" => Box::new(ConstantDetector::new(1)),
        "always2" => Box::new(ConstantDetector::new(2)),
        "random" => Box::new(RandomDetector { seed, choices: 2 }),
        _ => {
            return Err(Error::UnknownDetector {
                name: name.to_string(),
                available: DETECTOR_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    })
}

pub fn registry(n: usize, d: usize, k: usize, seed: u64) -> Result<Vec<Box<dyn Detector>>> {
    DETECTOR_NAMES
        .iter()
        .map(|name| detector_by_name(name, n, d, k, seed))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleOutcome {
    pub ensemble: String,
    /// Label a detector must output to be correct.
    pub truth: u8,
    pub success: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GameReport {
    pub mode: String,
    pub detector: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
    pub ensembles: Vec<EnsembleOutcome>,
    /// Success under equal priors on the ensembles.
    pub joint_success: f64,
    pub joint_standard_error: f64,
    /// Upper bound on TV between the two Gram laws (two-way games only).
    pub tv_bound: Option<f64>,
    /// `(1 + tv_bound) / 2`.
    pub ceiling: Option<f64>,
    /// `n < d/3`.
    pub small_n_regime: bool,
    /// Every per-ensemble success exceeds [`SUCCESS_LEVEL`].
    pub all_above_0_9: bool,
    pub theta: Option<Vec<f64>>,
}

/// `TV(W_n(Id,d), W_n(Id,d−k))` bounded by the triangle inequality over the
/// one-step bounds, capped at 1.
pub fn deficiency_tv_bound(n: usize, d: usize, k: usize) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..k {
        total += tv_closed_form_bound(n, d - j)?;
    }
    Ok(total.min(1.0))
}

type Sampler<'a> = Box<dyn Fn(&mut RngStream) -> Result<SampleBatch> + Send + Sync + 'a>;

/// Success counts of each detector on each ensemble, over shared batches.
fn play(
    ensembles: &[(Sampler<'_>, u8)],
    detectors: &[&dyn Detector],
    trials: u64,
    rng: &RngStream,
) -> Result<Vec<Vec<u64>>> {
    let counts: Vec<u64> = run_chunks(trials, rng, |r, count| {
        let mut c = vec![0u64; ensembles.len() * detectors.len()];
        for _ in 0..count {
            for (e, (sample, truth)) in ensembles.iter().enumerate() {
                let batch = sample(r).expect("ensemble parameters validated up front");
                for (k, det) in detectors.iter().enumerate() {
                    if det.evaluate(&batch) == *truth {
                        c[k * ensembles.len() + e] += 1;
                    }
                }
            }
        }
        c
    });
    Ok(counts
        .chunks(ensembles.len())
        .map(<[u64]>::to_vec)
        .collect())
}

struct GameSetup<'a> {
    mode: &'a str,
    n: usize,
    d: usize,
    k: usize,
    names: Vec<(&'a str, u8)>,
    tv_bound: Option<f64>,
    theta: Option<Vec<f64>>,
}

fn report(
    setup: &GameSetup<'_>,
    detector: &str,
    counts: &[u64],
    trials: u64,
    seed: u64,
) -> GameReport {
    let t = trials as f64;
    let ensembles: Vec<EnsembleOutcome> = setup
        .names
        .iter()
        .zip(counts)
        .map(|(&(name, truth), &c)| {
            let p = c as f64 / t;
            EnsembleOutcome {
                ensemble: name.to_string(),
                truth,
                success: p,
                standard_error: (p * (1.0 - p) / t).sqrt(),
            }
        })
        .collect();
    let m = ensembles.len() as f64;
    let joint_success = ensembles.iter().map(|e| e.success).sum::<f64>() / m;
    let joint_standard_error = ensembles
        .iter()
        .map(|e| e.standard_error.powi(2))
        .sum::<f64>()
        .sqrt()
        / m;
    GameReport {
        mode: setup.mode.to_string(),
        detector: detector.to_string(),
        n: setup.n,
        d: setup.d,
        k: setup.k,
        trials,
        seed,
        all_above_0_9: ensembles.iter().all(|e| e.success > SUCCESS_LEVEL),
        ensembles,
        joint_success,
        joint_standard_error,
        tv_bound: setup.tv_bound,
        ceiling: setup.tv_bound.map(|b| 0.5 * (1.0 + b)),
        small_n_regime: 3 * setup.n < setup.d,
        theta: setup.theta.clone(),
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_GAME_TRIALS {
        return Err(Error::invalid(format!(
            "games need at least {MIN_GAME_TRIALS} trials, got {trials}"
        )));
    }
    Ok(())
}

fn check_two_way(n: usize, d: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 || n + k > d {
        return Err(Error::invalid(format!(
            "two-way game needs n >= 1, k >= 1 and n + k <= d, got n={n}, d={d}, k={k}"
        )));
    }
    Ok(())
}

/// Equal-prior game between `FullRank` (answer 2) and `DeficientRandom(k)`
/// (answer 1), with every detector scored on the same batches.
pub fn run_two_way_games(
    n: usize,
    d: usize,
    k: usize,
    detectors: &[&dyn Detector],
    trials: u64,
    rng: &RngStream,
) -> Result<Vec<GameReport>> {
    check_two_way(n, d, k)?;
    check_trials(trials)?;
    let ensembles: Vec<(Sampler<'_>, u8)> = vec![
        (
            Box::new(move |r: &mut RngStream| full_rank_batch(d, n, r)),
            2,
        ),
        (
            Box::new(move |r: &mut RngStream| deficient_batch(d, k, n, r)),
            1,
        ),
    ];
    let setup = GameSetup {
        mode: "two-way",
        n,
        d,
        k,
        names: vec![("full_rank", 2), ("deficient_random", 1)],
        tv_bound: Some(deficiency_tv_bound(n, d, k)?),
        theta: None,
    };
    let counts = play(&ensembles, detectors, trials, rng)?;
    Ok(detectors
        .iter()
        .zip(&counts)
        .map(|(det, c)| report(&setup, det.name(), c, trials, rng.seed()))
        .collect())
}

pub fn run_two_way_game(
    n: usize,
    d: usize,
    k: usize,
    detector: &dyn Detector,
    trials: u64,
    rng: &RngStream,
) -> Result<GameReport> {
    Ok(run_two_way_games(n, d, k, &[detector], trials, rng)?.remove(0))
}

/// Equal-prior game over `FullRank` (2), `DeficientRandom(1)` (1) and
/// `DeficientRandom(2)` (0), labelled by ensemble.
pub fn run_three_way_game_with(
    n: usize,
    d: usize,
    detector: &dyn Detector,
    trials: u64,
    rng: &RngStream,
) -> Result<GameReport> {
    if d < 3 || n == 0 || n + 2 > d {
        return Err(Error::invalid(format!(
            "three-way game needs d >= 3 and 1 <= n <= d - 2, got n={n}, d={d}"
        )));
    }
    check_trials(trials)?;
    let ensembles: Vec<(Sampler<'_>, u8)> = vec![
        (
            Box::new(move |r: &mut RngStream| full_rank_batch(d, n, r)),
            2,
        ),
        (
            Box::new(move |r: &mut RngStream| deficient_batch(d, 1, n, r)),
            1,
        ),
        (
            Box::new(move |r: &mut RngStream| deficient_batch(d, 2, n, r)),
            0,
        ),
    ];
    let setup = GameSetup {
        mode: "three-way",
        n,
        d,
        k: 2,
        names: vec![
            ("full_rank", 2),
            ("deficient_random_1", 1),
            ("deficient_random_2", 0),
        ],
        tv_bound: None,
        theta: None,
    };
    let counts = play(&ensembles, &[detector], trials, rng)?;
    Ok(report(
        &setup,
        detector.name(),
        &counts[0],
        trials,
        rng.seed(),
    ))
}

/// Three-way game played by the maximum-likelihood detector.
pub fn run_three_way_game(n: usize, d: usize, trials: u64, rng: &RngStream) -> Result<GameReport> {
    let bayes = ThreeWayBayes::new(n, d)?;
    run_three_way_game_with(n, d, &bayes, trials, rng)
}

/// `|P_E θ|`, rejecting non-unit θ and θ ∈ E⊥.
pub fn check_theta(theta: &[f64]) -> Result<f64> {
    let nrm = norm(theta);
    if nrm.is_nan() || (nrm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm: nrm });
    }
    if theta.len() < 2 {
        return Err(Error::invalid("theta must have dimension >= 2"));
    }
    let projection_norm = theta[0].hypot(theta[1]);
    if projection_norm <= E_PERP_TOL {
        return Err(Error::ThetaInEPerp { projection_norm });
    }
    Ok(projection_norm)
}

/// Two-way game against the fixed covariance `Proj_{θ⊥}` (answer 1) and
/// `Id` (answer 2).
pub fn run_fixed_theta_game(
    n: usize,
    theta: &[f64],
    detector: &dyn Detector,
    trials: u64,
    rng: &RngStream,
) -> Result<GameReport> {
    let d = theta.len();
    check_theta(theta)?;
    check_two_way(n, d, 1)?;
    check_trials(trials)?;
    let normals = vec![theta.to_vec()];
    let ensembles: Vec<(Sampler<'_>, u8)> = vec![
        (
            Box::new(move |r: &mut RngStream| full_rank_batch(d, n, r)),
            2,
        ),
        (
            Box::new(move |r: &mut RngStream| projected_batch(d, normals.clone(), n, r)),
            1,
        ),
    ];
    let setup = GameSetup {
        mode: "fixed-theta",
        n,
        d,
        k: 1,
        names: vec![("full_rank", 2), ("deficient_fixed", 1)],
        tv_bound: Some(tv_closed_form_bound(n, d)?),
        theta: Some(theta.to_vec()),
    };
    let counts = play(&ensembles, &[detector], trials, rng)?;
    Ok(report(
        &setup,
        detector.name(),
        &counts[0],
        trials,
        rng.seed(),
    ))
}
