//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p php-contact --test acceptance`.

use php_contact::bounds::{
    g1, g1_closed_form, g4, h1, h2, lb_r1_closed_form, lb_r1_theorem1, lb_r2_theorem2, theta, ub_ppp, ub_r2_ppp,
    approx_equiv_density, BoundValue, PartitionScheme,
};
use php_contact::montecarlo::{
    dkw_epsilon, estimate_cdf, ks_distance, run_trials, RefCase, SimConfig, WindowPolicy,
};
use php_contact::{ModelParams, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};
use std::process::Command;
use std::time::Instant;

const LAMBDA1: f64 = 10.0 / 1e6;
const LAMBDA2_GRID: [f64; 2] = [50.0 / 1e6, 100.0 / 1e6];
const D_GRID: [f64; 2] = [50.0, 100.0];
const TRIALS: u64 = 100_000;
const CONFIDENCE: f64 = 0.99;
const DKW_CONFIDENCE: f64 = 0.999;

struct Outcome {
    pass: bool,
    detail: String,
}

fn grid() -> Vec<f64> {
    (1..=50).map(|i| 10.0 * i as f64).collect()
}

fn test_points() -> Vec<ModelParams> {
    let mut v = Vec::new();
    for l2 in LAMBDA2_GRID {
        for d in D_GRID {
            v.push(ModelParams::new(LAMBDA1, l2, d).unwrap());
        }
    }
    v
}

fn label(p: &ModelParams) -> String {
    format!("lambda2={}/km2 D={}m", p.lambda2() * 1e6, p.d_hole())
}

fn sim_config(case: RefCase, seed: u64) -> SimConfig {
    SimConfig {
        trials: TRIALS,
        master_seed: seed,
        r_max: 500.0,
        window_policy: WindowPolicy::default(),
        case,
    }
}

fn samples(p: &ModelParams, cfg: &SimConfig) -> Vec<f64> {
    run_trials(p, cfg)
        .into_iter()
        .map(|r| r.expect("trial failed"))
        .collect()
}

fn sandwich<L, U>(case: RefCase, lower: L, upper: U) -> Outcome
where
    L: Fn(f64, &ModelParams) -> BoundValue + Sync,
    U: Fn(f64, &ModelParams) -> BoundValue + Sync,
{
    let r = grid();
    let mut failures = Vec::new();
    let mut min_ok = true;
    let mut details = Vec::new();
    for (k, p) in test_points().iter().enumerate() {
        let s = samples(p, &sim_config(case, 2024 + k as u64));
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        if case == RefCase::R2 && min < p.d_hole() {
            min_ok = false;
        }
        let mc = estimate_cdf(&s, &r, CONFIDENCE).unwrap();
        let lb: Vec<BoundValue> = r.par_iter().map(|&x| lower(x, p)).collect();
        let ub: Vec<BoundValue> = r.par_iter().map(|&x| upper(x, p)).collect();
        let mut tight = 0usize;
        for i in 0..r.len() {
            if lb[i].clamped > mc.ci_high[i] {
                failures.push(format!("{} r={} lb {:.5} > ci_high {:.5}", label(p), r[i], lb[i].clamped, mc.ci_high[i]));
            }
            if ub[i].raw < mc.ci_low[i] {
                failures.push(format!("{} r={} ub {:.5} < ci_low {:.5}", label(p), r[i], ub[i].raw, mc.ci_low[i]));
            }
            if lb[i].clamped > 0.0 {
                tight += 1;
            }
        }
        details.push(format!("{}: min={:.3} nonzero-lb-rows={}", label(p), min, tight));
    }
    let mut detail = details.join("; ");
    if !failures.is_empty() {
        detail = format!("{} violations, first: {}; {detail}", failures.len(), failures[0]);
    }
    if !min_ok {
        detail = format!("minimum R2 below D; {detail}");
    }
    Outcome {
        pass: failures.is_empty() && min_ok,
        detail,
    }
}

fn criterion_1() -> Outcome {
    let tol = Tolerance::default();
    sandwich(
        RefCase::R1,
        |r, p| lb_r1_theorem1(r, p, tol).unwrap(),
        |r, p| ub_ppp(r, p.lambda2()).unwrap(),
    )
}

fn criterion_2() -> Outcome {
    let tol = Tolerance::default();
    sandwich(
        RefCase::R2,
        |r, p| lb_r2_theorem2(r, p, tol).unwrap(),
        |r, p| ub_r2_ppp(r, p).unwrap(),
    )
}

fn criterion_3() -> Outcome {
    let tol = Tolerance::default();
    let mut monotone_violations = Vec::new();
    let mut far = Vec::new();
    let mut worst = (0.0f64, String::new());
    let mut checked = 0;
    for p in test_points() {
        for r in grid() {
            let seq: Vec<BoundValue> = [1, 2, 4, 8]
                .iter()
                .map(|&n| lb_r1_closed_form(r, &p, &PartitionScheme::uniform(n).unwrap()).unwrap())
                .collect();
            for w in seq.windows(2) {
                let (a, b) = (w[0].raw, w[1].raw);
                let ok = a == b || b - a >= -1e-12 * a.abs().max(1.0);
                if !ok {
                    monotone_violations.push(format!("{} r={r}: {a} > {b}", label(&p)));
                }
            }
            let thm = lb_r1_theorem1(r, &p, tol).unwrap().clamped;
            let n8 = seq[3].clamped;
            let rel = if thm == 0.0 { if n8 == 0.0 { 0.0 } else { f64::INFINITY } } else { (n8 - thm).abs() / thm };
            checked += 1;
            if rel > 0.01 {
                far.push(format!("{} r={r}", label(&p)));
            }
            if rel > worst.0 {
                worst = (rel, format!("{} r={r} N8={n8:.6} thm1={thm:.6}", label(&p)));
            }
        }
    }
    let detail = format!(
        "monotone violations: {}; N=8 outside 1% of the integral bound at {} of {} points (worst {:.3}% at {})",
        monotone_violations.len(),
        far.len(),
        checked,
        100.0 * worst.0,
        worst.1
    );
    Outcome {
        pass: monotone_violations.is_empty() && far.is_empty(),
        detail,
    }
}

/// The single-interval hole term, written out directly from its printed
/// expression with the branch angle chosen by `r <= D`.
fn f_theta_direct(r: f64, l2: f64, d: f64) -> f64 {
    let th = if r <= d {
        (d / (2.0 * d - r)).asin()
    } else {
        (d / r).asin()
    };
    -(l2 * PI * r.min(d).powi(2)).exp_m1() * (d - r).powi(2) / 2.0
        - (4.0 * th * l2 * d * r).exp_m1() / (2.0 * l2 * th)
        + 2.0 * r * d
}

/// The printed outer expression, whose `r > D` branch carries
/// `exp(-lambda2 pi D^2)` rather than `exp(-lambda2 pi r^2)`.
fn printed_outer(r: f64, l1: f64, l2: f64, d: f64) -> f64 {
    let base = if r <= d { r } else { d };
    1.0 - (-l2 * PI * base * base).exp() * (-2.0 * PI * l1 * f_theta_direct(r, l2, d)).exp()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * b.abs().max(1.0)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let one = PartitionScheme::uniform(1).unwrap();
    let mut bad = Vec::new();
    let mut seam = 0;
    let mut outer_gap = 0;
    for i in 0..1000 {
        let l1: f64 = rng.random_range(1.0..50.0) / 1e6;
        let l2: f64 = rng.random_range(10.0..200.0) / 1e6;
        let d: f64 = rng.random_range(10.0..200.0);
        let r: f64 = if i % 10 == 0 {
            seam += 1;
            d
        } else {
            rng.random_range(1.0..600.0)
        };
        let p = ModelParams::new(l1, l2, d).unwrap();
        let ours = g1_closed_form(r, &p, &one).unwrap();
        let direct = f_theta_direct(r, l2, d);
        if !close(ours, direct, 1e-12) {
            bad.push(format!("r={r} l1={l1:e} l2={l2:e} D={d}: {ours} vs {direct}"));
        }
        let lb = lb_r1_closed_form(r, &p, &one).unwrap().raw;
        if !close(lb, printed_outer(r, l1, l2, d), 1e-12) {
            outer_gap += 1;
        }
    }
    let mut detail = format!(
        "{} hole-term mismatches at 1e-12 over 1000 points ({seam} on r = D); \
         info: printed r > D outer factor differs from the N = 1 derivation at {outer_gap} points",
        bad.len()
    );
    if let Some(first) = bad.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    Outcome {
        pass: bad.is_empty(),
        detail,
    }
}

fn criterion_5() -> Outcome {
    let tol = Tolerance::default();
    let mut bad = Vec::new();
    for (l1, d) in [(0.0, 100.0), (1e-5, 0.0), (0.0, 0.0)] {
        for l2 in LAMBDA2_GRID {
            let p = ModelParams::new(l1, l2, d).unwrap();
            for r in grid() {
                let expected = 1.0 - (-l2 * PI * r * r).exp();
                let mut vals = vec![
                    ("thm1", lb_r1_theorem1(r, &p, tol).unwrap().raw),
                    ("ub", ub_ppp(r, l2).unwrap().raw),
                    ("approx", approx_equiv_density(r, &p).unwrap().raw),
                ];
                for n in [1, 2, 4, 8] {
                    vals.push(("closed", lb_r1_closed_form(r, &p, &PartitionScheme::uniform(n).unwrap()).unwrap().raw));
                }
                for (name, v) in vals {
                    if (v - expected).abs() > 1e-12 {
                        bad.push(format!("{name} l1={l1} D={d} r={r}: {v} vs {expected}"));
                    }
                }
            }
        }
    }
    let p = ModelParams::new(0.0, 100.0 / 1e6, 100.0).unwrap();
    let s = samples(&p, &sim_config(RefCase::R1, 55));
    let ks = ks_distance(&s, |x| 1.0 - (-p.lambda2() * PI * x * x).exp());
    let eps = dkw_epsilon(s.len(), DKW_CONFIDENCE);
    let mut detail = format!("{} reduction mismatches; KS = {ks:.5} vs DKW band {eps:.5}", bad.len());
    if let Some(first) = bad.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    Outcome {
        pass: bad.is_empty() && ks <= eps,
        detail,
    }
}

// Independent transcriptions of the hole-term integrands.
fn theta_ref(ry: f64, d: f64) -> f64 {
    (d / (d + ry)).asin()
}

fn g1_integrand(r: f64, ry: f64, l2: f64, d: f64) -> f64 {
    let h = ((r + d).powi(2) - ry * ry) * theta_ref(ry, d);
    (1.0 - (l2 * h).exp()) * ry
}

fn g4_integrand(r: f64, ry: f64, l2: f64, d: f64) -> f64 {
    let h = ((r + d).min(ry + 2.0 * d).powi(2) - ry.max(2.0 * d).powi(2)) * theta_ref(ry, d);
    (1.0 - (l2 * h).exp()) * ry
}

/// Midpoint rule with `steps` cells, summed per chunk so the result does
/// not depend on the thread count.
fn midpoint<F: Fn(f64) -> f64 + Sync>(f: F, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let chunk = 10_000;
    (0..steps.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(steps);
            (lo..hi).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum::<f64>()
        * h
}

fn criterion_6() -> Outcome {
    const STEPS: usize = 10_000_000;
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for _ in 0..20 {
        let l2: f64 = rng.random_range(10.0..200.0) / 1e6;
        let d: f64 = rng.random_range(20.0..150.0);
        let p = ModelParams::new(1e-5, l2, d).unwrap();

        let r: f64 = rng.random_range(1.0..500.0);
        let enclosed = (1.0 - (l2 * PI * r.min(d).powi(2)).exp()) * (d - r).powi(2) / 2.0;
        let oracle = enclosed + midpoint(|y| g1_integrand(r, y, l2, d), (r - d).abs(), r + d, STEPS);
        let ours = g1(r, &p, tol).unwrap();
        let rel = ((ours - oracle) / oracle).abs();
        worst = worst.max(rel);
        if rel > 1e-8 {
            bad.push(format!("g1 r={r} l2={l2:e} D={d}: {ours} vs {oracle}"));
        }

        let r: f64 = rng.random_range(1.01 * d..d + 400.0);
        let oracle = midpoint(|y| g4_integrand(r, y, l2, d), 0.0, r + d, STEPS);
        let ours = g4(r, &p, tol).unwrap();
        let rel = ((ours - oracle) / oracle).abs();
        worst = worst.max(rel);
        if rel > 1e-8 {
            bad.push(format!("g4 r={r} l2={l2:e} D={d}: {ours} vs {oracle}"));
        }
    }
    let mut detail = format!("40 integrals, worst relative deviation {worst:.2e}");
    if let Some(first) = bad.first() {
        detail.push_str(&format!("; first failure: {first}"));
    }
    Outcome {
        pass: bad.is_empty(),
        detail,
    }
}

fn criterion_7() -> Outcome {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = Vec::new();
    for _ in 0..10_000 {
        let l2: f64 = rng.random_range(0.0..500.0) / 1e6;
        let d = rng.random_range(0.0..300.0);
        let r = rng.random_range(0.0..1000.0);
        let p = ModelParams::new(1e-5, l2, d).unwrap();
        let ry1 = rng.random_range((r - d).abs()..=r + d);
        if let Ok(t) = theta(ry1, d) {
            if !(0.0..=FRAC_PI_2).contains(&t) {
                violations.push(format!("theta({ry1}, {d}) = {t}"));
            }
        }
        match h1(r, ry1, d) {
            Ok(v) if v >= 0.0 => {}
            Err(_) if ry1 == 0.0 && d == 0.0 => {}
            other => violations.push(format!("h1({r}, {ry1}, {d}) = {other:?}")),
        }
        match g1(r, &p, tol) {
            Ok(v) if v <= 0.0 => {}
            other => violations.push(format!("g1({r}, {p:?}) = {other:?}")),
        }
        let r2 = d + rng.random_range(1e-6..1000.0);
        let ry2 = rng.random_range(0.0..=r2 + d);
        match h2(r2, ry2, d) {
            Ok(v) if v >= 0.0 => {}
            Err(_) if ry2 == 0.0 && d == 0.0 => {}
            other => violations.push(format!("h2({r2}, {ry2}, {d}) = {other:?}")),
        }
        match g4(r2, &p, tol) {
            Ok(v) if v <= 0.0 => {}
            other => violations.push(format!("g4({r2}, {p:?}) = {other:?}")),
        }
    }
    let mut detail = format!("{} violations over 10000 random points", violations.len());
    if let Some(first) = violations.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    Outcome {
        pass: violations.is_empty(),
        detail,
    }
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| -> Vec<u8> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_php-contact"))
            .args([
                "--threads", threads, "compare", "--lambda1", "10/km2", "--lambda2", "100/km2",
                "--D", "50m", "--rmax", "500m", "--trials", "100000", "--seed", "99",
            ])
            .arg("--output")
            .arg(&out)
            .stderr(std::process::Stdio::null())
            .status()
            .expect("binary runs");
        assert!(status.code().is_some());
        std::fs::read(&out).unwrap_or_default()
    };
    let a = run("1", "a.csv");
    let b = run("1", "b.csv");
    let c = run("4", "c.csv");
    let pass = !a.is_empty() && a == b && a == c;
    Outcome {
        pass,
        detail: format!("{} bytes; repeat identical: {}; 1 vs 4 threads identical: {}", a.len(), a == b, a == c),
    }
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; only a name
    // filter is honoured here.
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 sandwich R1", criterion_1),
        ("2 sandwich R2", criterion_2),
        ("3 closed-form convergence", criterion_3),
        ("4 closed-form N=1 identity", criterion_4),
        ("5 PPP reductions", criterion_5),
        ("6 quadrature oracle", criterion_6),
        ("7 sign invariants", criterion_7),
        ("8 determinism", criterion_8),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        if let Some(pat) = &filter {
            if !name.contains(pat.as_str()) {
                continue;
            }
        }
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "[{}] criterion {name} ({secs:.1}s): {}",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
        if !out.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
