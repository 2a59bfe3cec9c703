//! One function per subcommand, each returning a [`Report`].

use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use covlab::conditional::{
    alpha_analytic, alpha_monte_carlo, schur_conditional_covariance, section_covariance, MC_MAX_DIM,
};
use covlab::detection::{
    check_theta, detector_by_name, run_fixed_theta_game, run_three_way_game_with, run_two_way_game,
    Detector, GameReport, RandomDetector, ThreeWayBayes,
};
use covlab::rng::RngStream;
use covlab::sampler::uniform_sphere;
use covlab::stats::{run_chunks, Moments};
use covlab::tvlab::{tv_closed_form_bound, tv_report, SE_SLACK};
use covlab::wishart::{det_moments, wishart_sample, WishartParams};
use covlab::Error;

use crate::error::{CliError, CliResult};
use crate::matrix_file::read_matrix;
use crate::render::{aligned, Report};

/// Stream identifiers keep each command's draws apart for the same seed.
mod stream {
    pub const TV: u64 = 1;
    pub const ALPHA: u64 = 2;
    pub const MOMENTS: u64 = 3;
    pub const GAME: u64 = 4;
    pub const THETA: u64 = 5;
}

/// The bound level below which `n < d/3` must land.
pub const BOUND_LEVEL: f64 = 0.6;
/// Standard errors allowed between determinant moments and their MC estimates.
pub const MOMENT_Z_LIMIT: f64 = 5.0;
const MIN_MOMENT_TRIALS: u64 = 1000;

fn to_json<T: Serialize>(v: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(v)?)
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_pm(x: f64, se: f64) -> String {
    format!("{x:.6} ± {se:.6}")
}

#[derive(Serialize)]
struct BoundRow {
    n: usize,
    d: usize,
    closed_form_bound: f64,
    #[serde(rename = "below_0.6_flag")]
    below_flag: bool,
}

pub fn bound_table(d_max: usize) -> CliResult<Report> {
    if d_max < 3 {
        return Err(CliError::Usage(format!(
            "--d-max must be at least 3, got {d_max}"
        )));
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for d in 2..=d_max {
        for n in 1..d {
            let bound = tv_closed_form_bound(n, d)?;
            let below_flag = 3 * n >= d || bound < BOUND_LEVEL;
            if !below_flag {
                failures.push(format!("(n={n}, d={d})"));
            }
            rows.push(BoundRow {
                n,
                d,
                closed_form_bound: bound,
                below_flag,
            });
        }
    }
    let regime_max = rows
        .iter()
        .filter(|r| 3 * r.n < r.d)
        .map(|r| r.closed_form_bound)
        .fold(f64::NAN, f64::max);
    let row_values = rows.iter().map(to_json).collect::<CliResult<Vec<_>>>()?;
    let mut human = vec![format!("{:>4} {:>4} {:>10}  n<d/3", "n", "d", "bound")];
    human.extend(rows.iter().map(|r| {
        let mark = if 3 * r.n < r.d { "yes" } else { "" };
        format!(
            "{:>4} {:>4} {:>10.6}  {mark}",
            r.n, r.d, r.closed_form_bound
        )
    }));
    human.push(format!(
        "max bound with n < d/3: {}  (level {BOUND_LEVEL})",
        if regime_max.is_nan() {
            "none".to_string()
        } else {
            fmt(regime_max)
        }
    ));
    Ok(Report {
        json: json!({
            "d_max": d_max,
            "level": BOUND_LEVEL,
            "max_bound_below_third": if regime_max.is_nan() { Value::Null } else { json!(regime_max) },
            "rows": row_values.clone(),
        }),
        rows: Some(row_values),
        human,
        violation: (!failures.is_empty())
            .then(|| format!("bound not below {BOUND_LEVEL} at {}", failures.join(", "))),
    })
}

pub fn tv(n: usize, d: usize, trials: u64, seed: u64) -> CliResult<Report> {
    let rng = RngStream::new(seed, stream::TV);
    let r = tv_report(n, d, trials, &rng)?;
    let mut pairs = vec![
        ("n, d".to_string(), format!("{n}, {d}")),
        ("seed".to_string(), seed.to_string()),
        ("trials".to_string(), r.samples_used.to_string()),
        ("closed-form bound".to_string(), fmt(r.closed_form_bound)),
        ("moment-ratio bound".to_string(), fmt(r.moment_ratio_bound)),
        (
            "sqrt-det ratio (MC)".to_string(),
            fmt_pm(
                r.sqrt_moment_ratio_bound,
                r.sqrt_moment_ratio_standard_error,
            ),
        ),
        (
            "sqrt-det ratio (exact)".to_string(),
            fmt(r.sqrt_moment_ratio_exact),
        ),
        (
            "TV (MC)".to_string(),
            fmt_pm(r.mc_estimate, r.mc_standard_error),
        ),
    ];
    if let Some(q) = r.quadrature_value {
        pairs.push(("TV (quadrature)".to_string(), fmt(q)));
    }
    pairs.push(("chain ordered".to_string(), r.chain_ordered.to_string()));
    Ok(Report {
        json: to_json(&r)?,
        rows: None,
        human: aligned(&pairs),
        violation: (!r.chain_ordered)
            .then(|| format!("relaxation chain out of order beyond {SE_SLACK} standard errors")),
    })
}

fn matrix_rows(m: [[f64; 2]; 2]) -> Vec<String> {
    m.iter()
        .map(|r| format!("[{:>12.6} {:>12.6}]", r[0], r[1]))
        .collect()
}

pub fn alpha(
    path: &Path,
    i: usize,
    j: usize,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> CliResult<Report> {
    let a = read_matrix(path)?;
    let analytic = alpha_analytic(&a, i, j)?;
    let schur = schur_conditional_covariance(&a, i, j)?;
    let mc = if a.dim() <= MC_MAX_DIM {
        Some(alpha_monte_carlo(
            &a,
            i,
            j,
            epsilon,
            trials,
            &RngStream::new(seed, stream::ALPHA),
        )?)
    } else {
        None
    };
    let mut human = vec![
        format!("pair ({i}, {j}), d = {}, seed {seed}", a.dim()),
        "analytic (inverse precision block):".to_string(),
    ];
    human.extend(matrix_rows(analytic.values));
    human.push("Schur complement:".to_string());
    human.extend(matrix_rows(schur));
    match &mc {
        Some(est) => {
            human.push(format!(
                "Monte Carlo, epsilon {epsilon}, {} of {} accepted:",
                est.accepted, est.proposals
            ));
            human.extend(matrix_rows(est.alpha.values));
            human.push("standard errors:".to_string());
            human.extend(matrix_rows(est.standard_errors));
        }
        None => human.push(format!("Monte Carlo skipped (d > {MC_MAX_DIM})")),
    }
    Ok(Report {
        json: json!({
            "dim": a.dim(),
            "pair": [i, j],
            "seed": seed,
            "analytic": analytic.values,
            "schur": schur,
            "monte_carlo": to_json(&mc)?,
        }),
        rows: None,
        human,
        violation: None,
    })
}

#[derive(Serialize)]
struct MomentsReport {
    n: usize,
    p: usize,
    seed: u64,
    trials: u64,
    mean: f64,
    variance: f64,
    mc_mean: f64,
    mc_mean_standard_error: f64,
    mc_variance: f64,
    mc_variance_standard_error: f64,
    mean_z: f64,
    variance_z: f64,
}

pub fn moments(n: usize, p: usize, trials: u64, seed: u64) -> CliResult<Report> {
    let params = WishartParams::new(n, p)?;
    if trials < MIN_MOMENT_TRIALS {
        return Err(CliError::Usage(format!(
            "moments needs at least {MIN_MOMENT_TRIALS} trials, got {trials}"
        )));
    }
    let exact = det_moments(params);
    let mc: Moments = run_chunks(
        trials,
        &RngStream::new(seed, stream::MOMENTS),
        |r, count| {
            let mut m = Moments::new();
            for _ in 0..count {
                m.push(wishart_sample(params, r).det());
            }
            m
        },
    );
    let z = |gap: f64, se: f64| if se > 0.0 { gap / se } else { 0.0 };
    let r = MomentsReport {
        n,
        p,
        seed,
        trials,
        mean: exact.mean(),
        variance: exact.variance(),
        mc_mean: mc.mean(),
        mc_mean_standard_error: mc.std_error(),
        mc_variance: mc.variance(),
        mc_variance_standard_error: mc.variance_std_error(),
        mean_z: z(mc.mean() - exact.mean(), mc.std_error()),
        variance_z: z(mc.variance() - exact.variance(), mc.variance_std_error()),
    };
    let human = aligned(&[
        ("n, p".to_string(), format!("{n}, {p}")),
        ("seed".to_string(), seed.to_string()),
        ("E det (formula)".to_string(), format!("{:.6e}", r.mean)),
        (
            "E det (MC)".to_string(),
            format!("{:.6e} ± {:.2e}", r.mc_mean, r.mc_mean_standard_error),
        ),
        (
            "Var det (formula)".to_string(),
            format!("{:.6e}", r.variance),
        ),
        (
            "Var det (MC)".to_string(),
            format!(
                "{:.6e} ± {:.2e}",
                r.mc_variance, r.mc_variance_standard_error
            ),
        ),
        (
            "z (mean, variance)".to_string(),
            format!("{:.3}, {:.3}", r.mean_z, r.variance_z),
        ),
    ]);
    let bad = r.mean_z.abs() > MOMENT_Z_LIMIT || r.variance_z.abs() > MOMENT_Z_LIMIT;
    Ok(Report {
        json: to_json(&r)?,
        rows: None,
        human,
        violation: bad.then(|| format!("Monte Carlo moments off by more than {MOMENT_Z_LIMIT} SE")),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GameMode {
    TwoWay,
    ThreeWay,
    FixedTheta,
}

pub struct GameArgs<'a> {
    pub mode: GameMode,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub detector: &'a str,
    pub theta: Option<Vec<f64>>,
    pub trials: u64,
    pub seed: u64,
}

const THREE_WAY_DETECTORS: [&str; 2] = ["lr", "random"];

fn three_way_detector(name: &str, n: usize, d: usize, seed: u64) -> CliResult<Box<dyn Detector>> {
    Ok(match name {
        "lr" => Box::new(ThreeWayBayes::new(n, d)?),
        "random" => Box::new(RandomDetector { seed, choices: 3 }),
        _ => {
            return Err(Error::UnknownDetector {
                name: name.to_string(),
                available: THREE_WAY_DETECTORS.iter().map(|s| s.to_string()).collect(),
            }
            .into())
        }
    })
}

/// A seeded θ on the sphere outside `E⊥`.
fn default_theta(d: usize, seed: u64) -> CliResult<Vec<f64>> {
    let mut rng = RngStream::new(seed, stream::THETA);
    loop {
        let theta = uniform_sphere(d, &mut rng)?;
        if check_theta(&theta).is_ok() {
            return Ok(theta);
        }
    }
}

fn normalized(theta: Vec<f64>) -> CliResult<Vec<f64>> {
    let len = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(len > 0.0 && len.is_finite()) {
        return Err(CliError::Usage(
            "--theta must be a nonzero finite vector".to_string(),
        ));
    }
    Ok(theta.into_iter().map(|x| x / len).collect())
}

fn game_violation(r: &GameReport) -> Option<String> {
    if !r.small_n_regime {
        return None;
    }
    if r.all_above_0_9 {
        return Some("every ensemble above 0.9 success with n < d/3".to_string());
    }
    match r.ceiling {
        Some(c) if r.joint_success > c + SE_SLACK * r.joint_standard_error => Some(format!(
            "joint success {:.6} above ceiling {c:.6} + {SE_SLACK} SE",
            r.joint_success
        )),
        _ => None,
    }
}

pub fn game(args: GameArgs<'_>) -> CliResult<Report> {
    let GameArgs {
        mode,
        n,
        d,
        k,
        detector,
        theta,
        trials,
        seed,
    } = args;
    let rng = RngStream::new(seed, stream::GAME);
    let report = match mode {
        GameMode::TwoWay => {
            let det = detector_by_name(detector, n, d, k, seed)?;
            run_two_way_game(n, d, k, det.as_ref(), trials, &rng)?
        }
        GameMode::ThreeWay => {
            let det = three_way_detector(detector, n, d, seed)?;
            run_three_way_game_with(n, d, det.as_ref(), trials, &rng)?
        }
        GameMode::FixedTheta => {
            let theta = match theta {
                Some(t) => {
                    if t.len() != d {
                        return Err(CliError::Usage(format!(
                            "--theta has {} entries, expected d = {d}",
                            t.len()
                        )));
                    }
                    normalized(t)?
                }
                None => default_theta(d, seed)?,
            };
            let det = detector_by_name(detector, n, d, 1, seed)?;
            run_fixed_theta_game(n, &theta, det.as_ref(), trials, &rng)?
        }
    };
    let mut pairs = vec![
        ("mode".to_string(), report.mode.clone()),
        ("detector".to_string(), report.detector.clone()),
        ("n, d, k".to_string(), format!("{n}, {d}, {}", report.k)),
        ("seed, trials".to_string(), format!("{seed}, {trials}")),
    ];
    for e in &report.ensembles {
        pairs.push((
            format!("success on {} (truth {})", e.ensemble, e.truth),
            fmt_pm(e.success, e.standard_error),
        ));
    }
    pairs.push((
        "joint success".to_string(),
        fmt_pm(report.joint_success, report.joint_standard_error),
    ));
    if let (Some(b), Some(c)) = (report.tv_bound, report.ceiling) {
        pairs.push(("TV bound".to_string(), fmt(b)));
        pairs.push(("ceiling (1 + TV)/2".to_string(), fmt(c)));
    }
    pairs.push(("n < d/3".to_string(), report.small_n_regime.to_string()));
    pairs.push((
        "all ensembles above 0.9".to_string(),
        report.all_above_0_9.to_string(),
    ));
    Ok(Report {
        violation: game_violation(&report),
        json: to_json(&report)?,
        rows: None,
        human: aligned(&pairs),
    })
}

pub fn section(path: &Path) -> CliResult<Report> {
    let a = read_matrix(path)?;
    let s = section_covariance(&a)?;
    let mut human = vec![format!(
        "d = {}, rank of section covariance = {}",
        a.dim(),
        s.rank
    )];
    human.extend(matrix_rows(s.matrix));
    Ok(Report {
        json: json!({ "dim": a.dim(), "rank": s.rank, "matrix": s.matrix }),
        rows: None,
        human,
        violation: None,
    })
}
