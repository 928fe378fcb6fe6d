//! Seeded Monte Carlo simulation of contact distances and empirical CDF
//! estimation.
//!
//! Each trial owns an independent ChaCha8 stream: the key is derived from
//! the master seed and the stream id is the trial index. Samples therefore
//! depend only on `(params, config, trial_index)`, never on scheduling.
//!
//! A trial samples the baseline on a disk of radius `R` around the
//! reference point and hole centers on a disk of radius `R + D`. Every PHP
//! point inside `B(o, R)` is then exact, so the nearest one found is the
//! true contact point. An empty window is grown by sampling the added
//! annuli only, which keeps the draw exact.

use crate::model::{
    build_php, check_positive, nearest_distance, sample_annulus, sample_ppp_with, Disk,
    ModelParams, ParamError, Point, SimWindow,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::PI;
use thiserror::Error;

/// The window may grow to at most this multiple of its initial radius.
pub const WINDOW_GROWTH_CAP: f64 = 10.0;
pub const DEFAULT_TAIL_PROB: f64 = 1e-6;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("the hole process has zero density; adaptive windows need a positive one")]
    EmptyProcess,
    #[error("trial {trial}: no process point within the capped window radius {radius}")]
    Saturated { trial: u64, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RefCase {
    /// Reference point independent of the process.
    R1,
    /// Reference point at the center of a typical hole.
    R2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPolicy {
    /// Baseline disk of the given radius (m).
    Fixed { radius: f64 },
    /// Smallest radius whose PPP void probability at the equivalent
    /// density is below `tail_prob`.
    Adaptive { tail_prob: f64 },
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy::Adaptive {
            tail_prob: DEFAULT_TAIL_PROB,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub master_seed: u64,
    pub r_max: f64,
    pub window_policy: WindowPolicy,
    pub case: RefCase,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.trials == 0 {
            return Err(ParamError::Invalid("trials must be at least 1".into()));
        }
        check_positive("r_max", self.r_max)?;
        match self.window_policy {
            WindowPolicy::Fixed { radius } => {
                check_positive("window radius", radius)?;
            }
            WindowPolicy::Adaptive { tail_prob } => {
                if !(tail_prob > 0.0 && tail_prob < 1.0) {
                    return Err(ParamError::Invalid(format!(
                        "tail probability must lie in (0, 1), got {tail_prob}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Random stream of one trial.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Initial simulation window for `params` under `cfg`.
pub fn initial_window(params: &ModelParams, cfg: &SimConfig) -> Result<SimWindow, SimError> {
    cfg.validate()?;
    let d = params.d_hole();
    let radius = match cfg.window_policy {
        WindowPolicy::Fixed { radius } => radius,
        WindowPolicy::Adaptive { tail_prob } => {
            let density = params.equivalent_density();
            if !(density > 0.0) {
                return Err(SimError::EmptyProcess);
            }
            // Around a hole center the first D meters are empty anyway.
            let base = match cfg.case {
                RefCase::R1 => 0.0,
                RefCase::R2 => d,
            };
            (base * base + (1.0 / tail_prob).ln() / (PI * density)).sqrt()
        }
    };
    Ok(SimWindow::new(radius, d, d)?)
}

fn simulate(
    params: &ModelParams,
    cfg: &SimConfig,
    trial_index: u64,
    case: RefCase,
) -> Result<f64, SimError> {
    let window = initial_window(params, cfg)?;
    let d = params.d_hole();
    let cap = WINDOW_GROWTH_CAP * window.radius();
    let mut rng = trial_rng(cfg.master_seed, trial_index);

    let mut radius = window.radius();
    let mut baseline = sample_ppp_with(&mut rng, params.lambda2(), window.baseline_disk());
    let mut holes = sample_ppp_with(&mut rng, params.lambda1(), window.hole_disk());
    if case == RefCase::R2 {
        holes.extend(vec![Point::ORIGIN], window.hole_disk());
    }
    loop {
        let php = build_php(&baseline, &holes, d)?;
        if let Some(dist) = nearest_distance(&php, Point::ORIGIN) {
            return Ok(dist);
        }
        if radius >= cap {
            return Err(SimError::Saturated {
                trial: trial_index,
                radius,
            });
        }
        let grown = (2.0 * radius).min(cap);
        log::debug!("trial {trial_index}: growing window {radius} -> {grown}");
        let extra = sample_annulus(&mut rng, params.lambda2(), Point::ORIGIN, radius, grown);
        baseline.extend(extra, Disk { center: Point::ORIGIN, radius: grown });
        let extra = sample_annulus(&mut rng, params.lambda1(), Point::ORIGIN, radius + d, grown + d);
        holes.extend(extra, Disk { center: Point::ORIGIN, radius: grown + d });
        radius = grown;
    }
}

/// One draw of the contact distance from a reference point placed
/// independently of the process (at the origin, by stationarity).
pub fn simulate_r1(params: &ModelParams, cfg: &SimConfig, trial_index: u64) -> Result<f64, SimError> {
    simulate(params, cfg, trial_index, RefCase::R1)
}

/// One draw of the contact distance from the center of a typical hole.
/// The reference hole is added at the origin on top of an unconditioned
/// hole process.
pub fn simulate_r2(params: &ModelParams, cfg: &SimConfig, trial_index: u64) -> Result<f64, SimError> {
    simulate(params, cfg, trial_index, RefCase::R2)
}

/// Runs `cfg.trials` trials of `cfg.case` in parallel on the current rayon
/// pool. Results are in trial order.
pub fn run_trials(params: &ModelParams, cfg: &SimConfig) -> Vec<Result<f64, SimError>> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| simulate(params, cfg, i, cfg.case))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCdf {
    pub grid: Vec<f64>,
    pub estimate: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub trials: usize,
    pub confidence: f64,
}

/// Two-sided standard normal quantile for `confidence`.
pub fn normal_quantile(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + confidence / 2.0)
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Empirical CDF `#{s < r} / n` on `grid` with per-point Wilson intervals.
pub fn estimate_cdf(samples: &[f64], grid: &[f64], confidence: f64) -> Result<EmpiricalCdf, ParamError> {
    if samples.is_empty() {
        return Err(ParamError::Invalid("no samples".into()));
    }
    if samples.iter().any(|s| s.is_nan()) {
        return Err(ParamError::Invalid("NaN sample".into()));
    }
    if !grid.windows(2).all(|w| w[0] <= w[1]) {
        return Err(ParamError::Invalid("grid must be sorted".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(ParamError::Invalid(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let z = normal_quantile(confidence);
    let mut out = EmpiricalCdf {
        grid: grid.to_vec(),
        estimate: Vec::with_capacity(grid.len()),
        ci_low: Vec::with_capacity(grid.len()),
        ci_high: Vec::with_capacity(grid.len()),
        trials: n,
        confidence,
    };
    for &r in grid {
        let below = sorted.partition_point(|&s| s < r);
        let (lo, hi) = wilson_interval(below, n, z);
        out.estimate.push(below as f64 / n as f64);
        out.ci_low.push(lo);
        out.ci_high.push(hi);
    }
    Ok(out)
}

/// Half-width of the Dvoretzky–Kiefer–Wolfowitz band holding with
/// probability `confidence` for `n` samples.
pub fn dkw_epsilon(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

/// Kolmogorov–Smirnov distance `sup |F_n - F|` between the empirical CDF of
/// `samples` and a continuous `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}
