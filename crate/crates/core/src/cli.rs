//! Experiment orchestration behind the `php-contact` binary: option
//! resolution, bound sweeps, simulation comparison and CSV/JSON rendering.
//!
//! Options arrive as `key = value` pairs, either from a config file or from
//! flags; flags win. Recognised keys:
//!
//! | key          | example                          | default                     |
//! |--------------|----------------------------------|-----------------------------|
//! | `lambda1`    | `10/km2`                         | required                    |
//! | `lambda2`    | `100/km2`                        | required                    |
//! | `d`          | `100m`                           | required                    |
//! | `rmax`       | `500m`                           | required unless `r` is set  |
//! | `rmin`       | `10m`                            | `rmax / count`              |
//! | `count`      | `50`                             | `50`                        |
//! | `r`          | `10m,20m,40m`                    | (overrides the range)       |
//! | `case`       | `r1` / `r2`                      | `r1`                        |
//! | `curves`     | `thm1,closed:8,ub,approx,mc`     | depends on case and command |
//! | `trials`     | `100000`                         | none (no simulation)        |
//! | `seed`       | `7`                              | `1`                         |
//! | `window`     | `adaptive:1e-6` / `fixed:300m`   | `adaptive:1e-6`             |
//! | `confidence` | `0.99`                           | `0.99`                      |
//! | `rel_tol`    | `1e-10`                          | `1e-10`                     |
//! | `abs_tol`    | `1e-14`                          | `1e-14`                     |
//! | `format`     | `csv` / `json`                   | `csv`                       |
//! | `output`     | `out/r1.csv`                     | stdout                      |
//!
//! CSV layout: optional `# spec: <json>` and `# verdict: <json>` comment
//! lines, a header row, then one row per radius. Columns are `r`, then a
//! `<curve>_raw,<curve>` pair per analytic curve in the fixed order
//! `lb_thm1, lb_closed_<N> (ascending N), lb_thm2, ub_ppp, ub_r2_ppp,
//! approx_equiv`, then `mc,ci_low,ci_high` and, for `compare`, `pass`.
//! Numbers use 17 significant digits in `{:.16e}` form.

use crate::bounds::{
    approx_equiv_density, lb_r1_closed_form, lb_r1_theorem1, lb_r2_theorem2, ub_ppp, ub_r2_ppp,
    BoundError, BoundKind, BoundValue, PartitionScheme,
};
use crate::model::{ModelParams, ParamError};
use crate::montecarlo::{
    estimate_cdf, run_trials, EmpiricalCdf, RefCase, SimConfig, SimError, WindowPolicy,
    DEFAULT_CONFIDENCE, DEFAULT_TAIL_PROB,
};
use crate::quadrature::Tolerance;
use crate::units::{parse_density, parse_length, UnitError};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PHP_CONTACT_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const DEFAULT_COUNT: usize = 50;
const DEFAULT_SEED: u64 = 1;

const KEYS: [&str; 17] = [
    "lambda1", "lambda2", "d", "rmin", "rmax", "count", "r", "case", "curves", "trials", "seed",
    "window", "confidence", "rel_tol", "abs_tol", "format", "output",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Usage { field: String, message: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn usage(field: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => EXIT_USAGE,
            CliError::Numeric(_) | CliError::Io(_) => EXIT_NUMERIC,
        }
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Bounds,
    Simulate,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    Bound(BoundKind),
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RGrid {
    Range { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl RGrid {
    pub fn radii(&self) -> Vec<f64> {
        match self {
            RGrid::Range { min, max, count } => {
                let n = *count - 1;
                (0..=n)
                    .map(|i| match i {
                        0 => *min,
                        i if i == n => *max,
                        i => min + (max - min) * (i as f64 / n as f64),
                    })
                    .collect()
            }
            RGrid::List(v) => v.clone(),
        }
    }
}

/// Fully resolved experiment description. Serialized verbatim into every
/// output for provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    /// Parameter strings as supplied, before unit conversion.
    pub inputs: BTreeMap<String, String>,
    pub params: ModelParams,
    pub r_grid: RGrid,
    pub case: RefCase,
    pub curves: Vec<Curve>,
    pub sim: Option<SimConfig>,
    pub confidence: f64,
    pub quad_tol: Tolerance,
    pub format: Format,
    /// Destination; not part of the provenance record.
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn radii(&self) -> Vec<f64> {
        self.r_grid.radii()
    }

    pub fn bound_kinds(&self) -> Vec<BoundKind> {
        self.curves
            .iter()
            .filter_map(|c| match c {
                Curve::Bound(k) => Some(*k),
                Curve::Mc => None,
            })
            .collect()
    }

    pub fn wants_mc(&self) -> bool {
        self.curves.contains(&Curve::Mc)
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage("config", format!("line {}: expected key = value", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn canonical_key(key: &str) -> String {
    match key {
        "D" | "d_hole" => "d".to_string(),
        other => other.replace('-', "_"),
    }
}

fn unit_err(field: &str) -> impl Fn(UnitError) -> CliError + '_ {
    move |e| CliError::usage(field, e.to_string())
}

fn param_err(field: &str) -> impl Fn(ParamError) -> CliError + '_ {
    move |e| CliError::usage(field, e.to_string())
}

fn parse_num<T: std::str::FromStr>(field: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse::<T>()
        .map_err(|_| CliError::usage(field, format!("cannot parse `{v}`")))
}

fn parse_curves(v: &str) -> Result<Vec<Curve>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let lower = s.to_ascii_lowercase();
            let c = match lower.as_str() {
                "thm1" | "lb_thm1" => Curve::Bound(BoundKind::LbThm1),
                "thm2" | "lb_thm2" => Curve::Bound(BoundKind::LbThm2),
                "ub" | "ub_ppp" => Curve::Bound(BoundKind::UbPpp),
                "ub2" | "ub_r2_ppp" => Curve::Bound(BoundKind::UbR2Ppp),
                "approx" | "approx_equiv" => Curve::Bound(BoundKind::ApproxEquiv),
                "mc" => Curve::Mc,
                other => {
                    let n = other
                        .strip_prefix("closed:")
                        .or_else(|| other.strip_prefix("lb_closed_"))
                        .ok_or_else(|| CliError::usage("curves", format!("unknown curve `{s}`")))?;
                    let n: u32 = parse_num("curves", n)?;
                    if n == 0 {
                        return Err(CliError::usage("curves", "closed-form N must be >= 1"));
                    }
                    Curve::Bound(BoundKind::LbClosed { n })
                }
            };
            Ok(c)
        })
        .collect()
}

fn default_curves(case: RefCase, mode: Mode) -> Vec<Curve> {
    let mut v = match (case, mode) {
        (_, Mode::Simulate) => vec![],
        (RefCase::R1, _) => vec![
            Curve::Bound(BoundKind::LbThm1),
            Curve::Bound(BoundKind::LbClosed { n: 1 }),
            Curve::Bound(BoundKind::LbClosed { n: 8 }),
            Curve::Bound(BoundKind::UbPpp),
            Curve::Bound(BoundKind::ApproxEquiv),
        ],
        (RefCase::R2, _) => vec![
            Curve::Bound(BoundKind::LbThm2),
            Curve::Bound(BoundKind::UbR2Ppp),
        ],
    };
    if mode != Mode::Bounds {
        v.push(Curve::Mc);
    }
    v
}

fn curve_matches_case(kind: BoundKind, case: RefCase) -> bool {
    match kind {
        BoundKind::LbThm1 | BoundKind::LbClosed { .. } | BoundKind::UbPpp | BoundKind::ApproxEquiv => {
            case == RefCase::R1
        }
        BoundKind::LbThm2 | BoundKind::UbR2Ppp => case == RefCase::R2,
    }
}

fn parse_window(v: &str) -> Result<WindowPolicy, CliError> {
    let (kind, arg) = v.split_once(':').unwrap_or((v, ""));
    match kind.trim() {
        "adaptive" => {
            let tail_prob = if arg.is_empty() {
                DEFAULT_TAIL_PROB
            } else {
                parse_num("window", arg)?
            };
            Ok(WindowPolicy::Adaptive { tail_prob })
        }
        "fixed" => Ok(WindowPolicy::Fixed {
            radius: parse_length(arg).map_err(unit_err("window"))?,
        }),
        _ => Err(CliError::usage("window", format!("expected adaptive[:p] or fixed:<length>, got `{v}`"))),
    }
}

/// Merges config-file and flag options (flags win, with a warning per
/// conflict), validates them and fills defaults.
///
/// Returns the spec and the warnings to show the user.
pub fn parse_spec(
    mode: Mode,
    config: &[(String, String)],
    flags: &[(String, String)],
) -> Result<(ExperimentSpec, Vec<String>), CliError> {
    let mut warnings = Vec::new();
    let mut opts: BTreeMap<String, String> = BTreeMap::new();
    for (k, v) in config {
        let key = canonical_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(k, "unknown key in config file"));
        }
        opts.insert(key, v.clone());
    }
    for (k, v) in flags {
        let key = canonical_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(k, "unknown option"));
        }
        if let Some(old) = opts.insert(key.clone(), v.clone()) {
            if old != *v {
                warnings.push(format!(
                    "{key}: flag value `{v}` overrides config file value `{old}`"
                ));
            }
        }
    }
    let get = |k: &str| opts.get(k).map(String::as_str);
    let required = |k: &str| get(k).ok_or_else(|| CliError::usage(k, "required"));

    let lambda1 = parse_density(required("lambda1")?).map_err(unit_err("lambda1"))?;
    let lambda2 = parse_density(required("lambda2")?).map_err(unit_err("lambda2"))?;
    let d = parse_length(required("d")?).map_err(unit_err("d"))?;
    let params = ModelParams::new(lambda1, lambda2, d).map_err(param_err("params"))?;
    let mut inputs = BTreeMap::new();
    for k in ["lambda1", "lambda2", "d"] {
        inputs.insert(k.to_string(), opts[k].clone());
    }

    let r_grid = if let Some(list) = get("r") {
        let radii = list
            .split(',')
            .map(|s| parse_length(s).map_err(unit_err("r")))
            .collect::<Result<Vec<_>, _>>()?;
        RGrid::List(radii)
    } else {
        let max = parse_length(required("rmax")?).map_err(unit_err("rmax"))?;
        let count = match get("count") {
            Some(v) => parse_num::<usize>("count", v)?,
            None => DEFAULT_COUNT,
        };
        if count < 2 {
            return Err(CliError::usage("count", "need at least 2 grid points"));
        }
        let min = match get("rmin") {
            Some(v) => parse_length(v).map_err(unit_err("rmin"))?,
            None => max / count as f64,
        };
        RGrid::Range { min, max, count }
    };
    let radii = r_grid.radii();
    if radii.len() < 2 {
        return Err(CliError::usage("r", "need at least 2 grid points"));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(CliError::usage("r", "radii must be finite and non-negative"));
    }
    if !radii.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::usage("r", "grid must be strictly increasing"));
    }

    let case = match get("case").map(str::to_ascii_lowercase).as_deref() {
        None | Some("r1") => RefCase::R1,
        Some("r2") => RefCase::R2,
        Some(other) => return Err(CliError::usage("case", format!("expected r1 or r2, got `{other}`"))),
    };

    let mut curves = match get("curves") {
        Some(v) => parse_curves(v)?,
        None => default_curves(case, mode),
    };
    match mode {
        Mode::Bounds => {
            if curves.contains(&Curve::Mc) {
                return Err(CliError::usage("curves", "mc is not available in `bounds`; use `compare`"));
            }
        }
        Mode::Simulate => curves = vec![Curve::Mc],
        Mode::Compare => {
            if !curves.contains(&Curve::Mc) {
                curves.push(Curve::Mc);
            }
        }
    }
    curves.sort();
    curves.dedup();
    if curves.is_empty() {
        return Err(CliError::usage("curves", "no curves requested"));
    }

    let sim = match get("trials") {
        None => None,
        Some(t) => {
            let trials: u64 = parse_num("trials", t)?;
            let master_seed = match get("seed") {
                Some(s) => parse_num("seed", s)?,
                None => DEFAULT_SEED,
            };
            let window_policy = match get("window") {
                Some(w) => parse_window(w)?,
                None => WindowPolicy::default(),
            };
            let cfg = SimConfig {
                trials,
                master_seed,
                r_max: *radii.last().expect("grid has points"),
                window_policy,
                case,
            };
            cfg.validate().map_err(param_err("sim"))?;
            Some(cfg)
        }
    };
    if curves.contains(&Curve::Mc) {
        if sim.is_none() {
            return Err(CliError::usage("trials", "simulation requested but no trial count given"));
        }
        for kind in curves.iter().filter_map(|c| match c {
            Curve::Bound(k) => Some(*k),
            Curve::Mc => None,
        }) {
            if !curve_matches_case(kind, case) {
                return Err(CliError::usage(
                    "curves",
                    format!("curve {kind} does not belong to case {case:?}"),
                ));
            }
        }
    }

    let confidence = match get("confidence") {
        Some(v) => parse_num("confidence", v)?,
        None => DEFAULT_CONFIDENCE,
    };
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(CliError::usage("confidence", "must lie in (0, 1)"));
    }
    let mut quad_tol = Tolerance::default();
    if let Some(v) = get("rel_tol") {
        quad_tol.rel = parse_num("rel_tol", v)?;
    }
    if let Some(v) = get("abs_tol") {
        quad_tol.abs = parse_num("abs_tol", v)?;
    }
    if !(quad_tol.rel > 0.0 && quad_tol.abs > 0.0) {
        return Err(CliError::usage("rel_tol", "tolerances must be positive"));
    }
    let format = match get("format") {
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => return Err(CliError::usage("format", format!("expected csv or json, got `{other}`"))),
    };
    let output = get("output").map(PathBuf::from);

    Ok((
        ExperimentSpec {
            inputs,
            params,
            r_grid,
            case,
            curves,
            sim,
            confidence,
            quad_tol,
            format,
            output,
        },
        warnings,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveColumn {
    pub kind: BoundKind,
    pub raw: Vec<f64>,
    pub clamped: Vec<f64>,
}

/// Pass/fail of the sandwich check `lb <= ci_high` and `ub >= ci_low`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub rows: Vec<bool>,
    pub failed_rows: usize,
    pub master_seed: u64,
    pub trials: u64,
    /// Trials whose window saturated; they are counted as `R >= radius`,
    /// which is exact for every grid radius up to the saturation radius.
    pub saturated_trials: usize,
    pub min_sample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfTable {
    pub r: Vec<f64>,
    pub curves: Vec<CurveColumn>,
    pub mc: Option<EmpiricalCdf>,
    pub verdict: Option<Verdict>,
}

fn evaluate(kind: BoundKind, r: f64, spec: &ExperimentSpec) -> Result<BoundValue, BoundError> {
    let p = &spec.params;
    let tol = spec.quad_tol;
    match kind {
        BoundKind::LbThm1 => lb_r1_theorem1(r, p, tol),
        BoundKind::LbClosed { n } => lb_r1_closed_form(r, p, &PartitionScheme::uniform(n)?),
        BoundKind::LbThm2 => lb_r2_theorem2(r, p, tol),
        BoundKind::UbPpp => ub_ppp(r, p.lambda2()),
        BoundKind::UbR2Ppp => ub_r2_ppp(r, p),
        BoundKind::ApproxEquiv => approx_equiv_density(r, p),
    }
}

/// Evaluates every requested analytic curve on the grid.
pub fn run_bounds(spec: &ExperimentSpec) -> Result<CdfTable, CliError> {
    let r = spec.radii();
    let curves = spec
        .bound_kinds()
        .into_iter()
        .map(|kind| {
            let values = r
                .par_iter()
                .map(|&x| evaluate(kind, x, spec))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(CurveColumn {
                kind,
                raw: values.iter().map(|v| v.raw).collect(),
                clamped: values.iter().map(|v| v.clamped).collect(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(CdfTable {
        r,
        curves,
        mc: None,
        verdict: None,
    })
}

/// Draws the configured trials and turns them into samples, converting
/// saturated trials into censored values where that is exact.
fn collect_samples(spec: &ExperimentSpec) -> Result<(Vec<f64>, usize), CliError> {
    let cfg = spec
        .sim
        .as_ref()
        .ok_or_else(|| CliError::usage("trials", "simulation requested but no trial count given"))?;
    let r_max = *spec.radii().last().expect("grid has points");
    let mut samples = Vec::with_capacity(cfg.trials as usize);
    let mut saturated = 0;
    let mut too_small = Vec::new();
    for res in run_trials(&spec.params, cfg) {
        match res {
            Ok(s) => samples.push(s),
            Err(SimError::Saturated { trial, radius }) => {
                saturated += 1;
                if radius >= r_max {
                    samples.push(radius);
                } else {
                    too_small.push(trial);
                }
            }
            Err(e) => return Err(CliError::Numeric(e.to_string())),
        }
    }
    if !too_small.is_empty() {
        return Err(CliError::Numeric(format!(
            "{} of {} trials saturated below the largest grid radius (first: trial {})",
            too_small.len(),
            cfg.trials,
            too_small[0]
        )));
    }
    if saturated > 0 {
        log::warn!("{saturated} trials saturated and were censored");
    }
    Ok((samples, saturated))
}

fn simulate_table(spec: &ExperimentSpec, mut table: CdfTable) -> Result<CdfTable, CliError> {
    let (samples, saturated) = collect_samples(spec)?;
    let mc = estimate_cdf(&samples, &table.r, spec.confidence)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let rows: Vec<bool> = (0..table.r.len())
        .map(|i| {
            table.curves.iter().all(|c| {
                if c.kind.is_lower_bound() {
                    c.clamped[i] <= mc.ci_high[i]
                } else if c.kind.is_upper_bound() {
                    c.raw[i] >= mc.ci_low[i]
                } else {
                    true
                }
            })
        })
        .collect();
    let cfg = spec.sim.as_ref().expect("checked by collect_samples");
    table.verdict = Some(Verdict {
        pass: rows.iter().all(|&p| p),
        failed_rows: rows.iter().filter(|&&p| !p).count(),
        rows,
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        saturated_trials: saturated,
        min_sample: samples.iter().copied().fold(f64::INFINITY, f64::min),
    });
    table.mc = Some(mc);
    Ok(table)
}

/// Bounds sweep plus Monte Carlo estimate and sandwich verdict.
pub fn run_compare(spec: &ExperimentSpec) -> Result<CdfTable, CliError> {
    let table = run_bounds(spec)?;
    simulate_table(spec, table)
}

/// Monte Carlo estimate only.
pub fn run_simulate(spec: &ExperimentSpec) -> Result<CdfTable, CliError> {
    let table = CdfTable {
        r: spec.radii(),
        curves: Vec::new(),
        mc: None,
        verdict: None,
    };
    let mut t = simulate_table(spec, table)?;
    t.verdict = None;
    Ok(t)
}

pub fn run(mode: Mode, spec: &ExperimentSpec) -> Result<CdfTable, CliError> {
    match mode {
        Mode::Bounds => run_bounds(spec),
        Mode::Simulate => run_simulate(spec),
        Mode::Compare => run_compare(spec),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders the table in the spec's format, embedding the spec.
pub fn render(spec: &ExperimentSpec, table: &CdfTable) -> String {
    match spec.format {
        Format::Csv => render_csv(spec, table),
        Format::Json => render_json(spec, table),
    }
}

fn render_csv(spec: &ExperimentSpec, table: &CdfTable) -> String {
    let mut out = String::new();
    let spec_json = serde_json::to_string(spec).expect("spec serializes");
    writeln!(out, "# spec: {spec_json}").unwrap();
    if let Some(v) = &table.verdict {
        #[derive(Serialize)]
        struct Summary<'a> {
            pass: bool,
            failed_rows: usize,
            master_seed: u64,
            trials: u64,
            saturated_trials: usize,
            min_sample: &'a str,
        }
        let min = num(v.min_sample);
        let s = Summary {
            pass: v.pass,
            failed_rows: v.failed_rows,
            master_seed: v.master_seed,
            trials: v.trials,
            saturated_trials: v.saturated_trials,
            min_sample: &min,
        };
        writeln!(out, "# verdict: {}", serde_json::to_string(&s).unwrap()).unwrap();
    }
    let mut header = vec!["r".to_string()];
    for c in &table.curves {
        let name = c.kind.column_name();
        header.push(format!("{name}_raw"));
        header.push(name);
    }
    if table.mc.is_some() {
        header.extend(["mc", "ci_low", "ci_high"].map(String::from));
    }
    if table.verdict.is_some() {
        header.push("pass".into());
    }
    writeln!(out, "{}", header.join(",")).unwrap();
    for (i, r) in table.r.iter().enumerate() {
        let mut row = vec![num(*r)];
        for c in &table.curves {
            row.push(num(c.raw[i]));
            row.push(num(c.clamped[i]));
        }
        if let Some(mc) = &table.mc {
            row.push(num(mc.estimate[i]));
            row.push(num(mc.ci_low[i]));
            row.push(num(mc.ci_high[i]));
        }
        if let Some(v) = &table.verdict {
            row.push(v.rows[i].to_string());
        }
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

fn render_json(spec: &ExperimentSpec, table: &CdfTable) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        spec: &'a ExperimentSpec,
        #[serde(flatten)]
        table: &'a CdfTable,
    }
    // Non-finite raw values (overflowed lower bounds) serialize as null.
    let mut s = serde_json::to_string_pretty(&Doc { spec, table }).expect("table serializes");
    s.push('\n');
    s
}

/// Output destination: the explicit path, else `$PHP_CONTACT_OUT_DIR/<name>`,
/// else `None` for stdout.
pub fn resolve_output(spec: &ExperimentSpec, default_name: &str) -> Option<PathBuf> {
    spec.output.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(|dir| PathBuf::from(dir).join(format!("{default_name}.{}", spec.format.extension())))
    })
}

/// Exit status for a finished run.
pub fn exit_code(table: &CdfTable) -> i32 {
    match &table.verdict {
        Some(v) if !v.pass => EXIT_VERDICT_FAIL,
        _ => EXIT_OK,
    }
}

/// The λ₂ (per km²) and D (m) combinations swept by `reproduce-figs`, with
/// λ₁ fixed at 10 per km².
pub const FIGURE_LAMBDA1: &str = "10/km2";
pub const FIGURE_SWEEP: [(&str, &str); 4] = [("50/km2", "50m"), ("50/km2", "100m"), ("100/km2", "50m"), ("100/km2", "100m")];
