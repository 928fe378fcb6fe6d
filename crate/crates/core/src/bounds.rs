//! Analytic bounds and approximations for the contact-distance CDF of a
//! Poisson hole process.
//!
//! Two reference points are covered: a point placed independently of the
//! process (`R1`) and the center of a typical hole (`R2`). Lower bounds
//! come from over-counting the area removed by holes: overlaps between
//! holes are ignored and each hole's intersection with the search disk is
//! replaced by a circular sector seen from a virtual apex. The baseline
//! PPP (all holes ignored) gives the matching upper bounds.
//!
//! Every evaluator returns a [`BoundValue`] carrying both the raw formula
//! value and its clamp to `[0, 1]`. The raw lower bounds go negative (and
//! overflow to `-inf`) once the over-counted hole area dominates, which
//! happens quickly when `lambda2 * pi * D^2` is of order one.

use crate::model::{check_non_negative, ModelParams, ParamError};
use crate::quadrature::{integrate_piecewise, QuadError, Tolerance};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("quadrature failed: {0}")]
    Quad(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    LbThm1,
    LbClosed { n: u32 },
    LbThm2,
    UbPpp,
    UbR2Ppp,
    ApproxEquiv,
}

impl BoundKind {
    /// Stable column name used in tabular output.
    pub fn column_name(&self) -> String {
        match self {
            BoundKind::LbThm1 => "lb_thm1".into(),
            BoundKind::LbClosed { n } => format!("lb_closed_{n}"),
            BoundKind::LbThm2 => "lb_thm2".into(),
            BoundKind::UbPpp => "ub_ppp".into(),
            BoundKind::UbR2Ppp => "ub_r2_ppp".into(),
            BoundKind::ApproxEquiv => "approx_equiv".into(),
        }
    }

    pub fn is_lower_bound(&self) -> bool {
        matches!(
            self,
            BoundKind::LbThm1 | BoundKind::LbClosed { .. } | BoundKind::LbThm2
        )
    }

    pub fn is_upper_bound(&self) -> bool {
        matches!(self, BoundKind::UbPpp | BoundKind::UbR2Ppp)
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.column_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub raw: f64,
    pub clamped: f64,
    pub kind: BoundKind,
}

impl BoundValue {
    pub fn new(raw: f64, kind: BoundKind) -> Self {
        Self {
            raw,
            clamped: raw.clamp(0.0, 1.0),
            kind,
        }
    }
}

/// Partition of the `[|r - D|, r + D]` integration range into `N` equal
/// sub-intervals. Doubling `N` refines the partition, which keeps the
/// closed-form bound non-decreasing in `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionScheme {
    n_intervals: u32,
}

impl PartitionScheme {
    pub fn uniform(n_intervals: u32) -> Result<Self, ParamError> {
        if n_intervals == 0 {
            return Err(ParamError::Invalid(
                "partition needs at least one sub-interval".into(),
            ));
        }
        Ok(Self { n_intervals })
    }

    pub fn n_intervals(&self) -> u32 {
        self.n_intervals
    }

    /// `N + 1` breakpoints from `lo` to `hi`; both ends are reproduced
    /// exactly.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.n_intervals;
        (0..=n)
            .map(|i| match i {
                0 => lo,
                i if i == n => hi,
                i => lo + (hi - lo) * (i as f64 / n as f64),
            })
            .collect()
    }
}

/// Half-angle of the tangent cone to a hole of radius `d_hole` seen from a
/// point at distance `d_hole + r_y` from its center.
pub fn theta(r_y: f64, d_hole: f64) -> Result<f64, BoundError> {
    check_non_negative("r_y", r_y)?;
    check_non_negative("d_hole", d_hole)?;
    if r_y == 0.0 && d_hole == 0.0 {
        return Err(BoundError::Domain("theta(0, 0) is undefined".into()));
    }
    Ok(theta_unchecked(r_y, d_hole))
}

#[inline]
fn theta_unchecked(r_y: f64, d_hole: f64) -> f64 {
    (d_hole / (d_hole + r_y)).min(1.0).asin()
}

#[inline]
fn h1_unchecked(r: f64, r_y: f64, d: f64) -> f64 {
    // (r + D)^2 - r_y^2, factored for accuracy near the upper endpoint.
    (r + d - r_y) * (r + d + r_y) * theta_unchecked(r_y, d)
}

#[inline]
fn h2_unchecked(r: f64, r_y: f64, d: f64) -> f64 {
    let outer = (r + d).min(r_y + 2.0 * d);
    let inner = r_y.max(2.0 * d);
    (outer - inner) * (outer + inner) * theta_unchecked(r_y, d)
}

/// Sector area standing in for the intersection of `B(o, r)` with a hole
/// centered at distance `r_y`, for an arbitrary reference point.
pub fn h1(r: f64, r_y: f64, d_hole: f64) -> Result<f64, BoundError> {
    check_non_negative("r", r)?;
    check_non_negative("d_hole", d_hole)?;
    if !(r_y >= (r - d_hole).abs() && r_y <= r + d_hole) {
        return Err(BoundError::Domain(format!(
            "r_y = {r_y} outside [{}, {}]",
            (r - d_hole).abs(),
            r + d_hole
        )));
    }
    theta(r_y, d_hole)?;
    Ok(h1_unchecked(r, r_y, d_hole))
}

/// Same as [`h1`] for a reference point at a hole center, where `B(o, D)` is
/// already empty. Only defined for `r > d_hole`.
pub fn h2(r: f64, r_y: f64, d_hole: f64) -> Result<f64, BoundError> {
    check_non_negative("d_hole", d_hole)?;
    if !(r > d_hole) {
        return Err(BoundError::Domain(format!(
            "h2 needs r > D (r = {r}, D = {d_hole})"
        )));
    }
    if !(r_y >= 0.0 && r_y <= r + d_hole) {
        return Err(BoundError::Domain(format!(
            "r_y = {r_y} outside [0, {}]",
            r + d_hole
        )));
    }
    theta(r_y, d_hole)?;
    Ok(h2_unchecked(r, r_y, d_hole))
}

/// Integral that over- or under-flowed the f64 range is reported as
/// `-inf`: the integrands are `1 - exp(non-negative)`, so the only way to
/// leave the representable range is downwards.
fn overflow_to_neg_inf(res: Result<f64, QuadError>) -> Result<f64, BoundError> {
    match res {
        Err(QuadError::NonFinite { value, .. }) if value == f64::NEG_INFINITY => {
            Ok(f64::NEG_INFINITY)
        }
        other => Ok(other?),
    }
}

/// Contribution of holes whose whole intersection with `B(o, r)` is a disk
/// of radius `min(r, D)`: `(1 - exp(lambda2 pi min(r,D)^2)) (D - r)^2 / 2`.
fn enclosed_term(r: f64, params: &ModelParams) -> f64 {
    let d = params.d_hole();
    let m = r.min(d);
    -(params.lambda2() * PI * m * m).exp_m1() * (d - r) * (d - r) / 2.0
}

/// The `G1` term of the R1 lower bound. Always `<= 0`.
pub fn g1(r: f64, params: &ModelParams, tol: Tolerance) -> Result<f64, BoundError> {
    check_non_negative("r", r)?;
    let d = params.d_hole();
    let lambda2 = params.lambda2();
    if lambda2 == 0.0 {
        return Ok(0.0);
    }
    let integrand = |r_y: f64| -(lambda2 * h1_unchecked(r, r_y, d)).exp_m1() * r_y;
    let integral = overflow_to_neg_inf(
        integrate_piecewise(integrand, (r - d).abs(), r + d, &[], tol).map(|q| q.value),
    )?;
    Ok(enclosed_term(r, params) + integral)
}

/// The `G4` term of the R2 lower bound, defined for `r > D`. Always `<= 0`.
pub fn g4(r: f64, params: &ModelParams, tol: Tolerance) -> Result<f64, BoundError> {
    let d = params.d_hole();
    if !(r > d) {
        return Err(BoundError::Domain(format!(
            "g4 needs r > D (r = {r}, D = {d})"
        )));
    }
    let lambda2 = params.lambda2();
    if lambda2 == 0.0 || d == 0.0 {
        return Ok(0.0);
    }
    let integrand = |r_y: f64| -(lambda2 * h2_unchecked(r, r_y, d)).exp_m1() * r_y;
    // H2 has kinks where the min/max switch branches.
    overflow_to_neg_inf(
        integrate_piecewise(integrand, 0.0, r + d, &[2.0 * d, r - d], tol).map(|q| q.value),
    )
}

/// `1 - exp(-density * area)`, the probability that a PPP has a point in a
/// region of the given area.
fn ppp_hit_probability(density: f64, area: f64) -> f64 {
    -(-density * area).exp_m1()
}

/// `1 - exp(-base_area * lambda2) * exp(-2 pi lambda1 g)` evaluated as
/// `-expm1(...)`; a zero `lambda1` drops the hole factor entirely.
fn lower_bound_from(params: &ModelParams, base_area: f64, g: f64) -> f64 {
    if params.lambda1() == 0.0 {
        return ppp_hit_probability(params.lambda2(), base_area);
    }
    -(-params.lambda2() * base_area - 2.0 * PI * params.lambda1() * g).exp_m1()
}

/// Lower bound on `P(R1 < r)` with the hole term integrated numerically.
pub fn lb_r1_theorem1(
    r: f64,
    params: &ModelParams,
    tol: Tolerance,
) -> Result<BoundValue, BoundError> {
    let g = g1(r, params, tol)?;
    Ok(BoundValue::new(
        lower_bound_from(params, PI * r * r, g),
        BoundKind::LbThm1,
    ))
}

/// Closed-form integral of `(1 - exp(k (c - x^2))) x` over `[a, b]` where
/// `u_a = c - a^2`, `u_b = c - b^2`.
fn closed_piece(a: f64, b: f64, u_a: f64, u_b: f64, k: f64) -> f64 {
    let span = u_a - u_b;
    if k * u_a < 1e-12 {
        // Second-order expansion in k; the zeroth-order terms cancel
        // because b^2 - a^2 = u_a - u_b.
        return -k * (u_a + u_b) * span / 4.0;
    }
    let area = (b - a) * (b + a) / 2.0;
    // e^{k u_a} (1 - e^{-k span}) stays finite-or-+inf without inf - inf.
    area - (k * u_a).exp() * -(-k * span).exp_m1() / (2.0 * k)
}

/// Closed-form counterpart of [`g1`]: on each sub-interval the tangent
/// angle is frozen at its left-endpoint value, which over-estimates it and
/// makes the hole integral elementary.
pub fn g1_closed_form(
    r: f64,
    params: &ModelParams,
    scheme: &PartitionScheme,
) -> Result<f64, BoundError> {
    check_non_negative("r", r)?;
    let d = params.d_hole();
    let lambda2 = params.lambda2();
    let lo = (r - d).abs();
    let hi = r + d;
    let mut g = enclosed_term(r, params);
    if hi > lo && lambda2 > 0.0 {
        let u = |x: f64| (hi - x) * (hi + x);
        let knots = scheme.breakpoints(lo, hi);
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let k = lambda2 * theta_unchecked(a, d);
            g += closed_piece(a, b, u(a), u(b), k);
        }
    }
    Ok(g)
}

/// Closed-form lower bound on `P(R1 < r)` built on [`g1_closed_form`].
pub fn lb_r1_closed_form(
    r: f64,
    params: &ModelParams,
    scheme: &PartitionScheme,
) -> Result<BoundValue, BoundError> {
    let g = g1_closed_form(r, params, scheme)?;
    Ok(BoundValue::new(
        lower_bound_from(params, PI * r * r, g),
        BoundKind::LbClosed {
            n: scheme.n_intervals(),
        },
    ))
}

/// Lower bound on `P(R2 < r)`; exactly zero for `r <= D`.
pub fn lb_r2_theorem2(
    r: f64,
    params: &ModelParams,
    tol: Tolerance,
) -> Result<BoundValue, BoundError> {
    check_non_negative("r", r)?;
    let d = params.d_hole();
    if r <= d {
        return Ok(BoundValue::new(0.0, BoundKind::LbThm2));
    }
    let g = g4(r, params, tol)?;
    Ok(BoundValue::new(
        lower_bound_from(params, PI * (r - d) * (r + d), g),
        BoundKind::LbThm2,
    ))
}

/// Baseline-PPP upper bound `1 - exp(-lambda2 pi r^2)`.
pub fn ub_ppp(r: f64, lambda2: f64) -> Result<BoundValue, BoundError> {
    check_non_negative("r", r)?;
    check_non_negative("lambda2", lambda2)?;
    Ok(BoundValue::new(
        ppp_hit_probability(lambda2, PI * r * r),
        BoundKind::UbPpp,
    ))
}

/// Baseline-PPP upper bound for the hole-center reference point: only the
/// reference hole is kept, `1 - exp(-lambda2 pi (r^2 - D^2))` for `r > D`.
pub fn ub_r2_ppp(r: f64, params: &ModelParams) -> Result<BoundValue, BoundError> {
    check_non_negative("r", r)?;
    let d = params.d_hole();
    let raw = if r <= d {
        0.0
    } else {
        ppp_hit_probability(params.lambda2(), PI * (r - d) * (r + d))
    };
    Ok(BoundValue::new(raw, BoundKind::UbR2Ppp))
}

/// PPP approximation with the mean density of the hole process. Not a
/// bound.
pub fn approx_equiv_density(r: f64, params: &ModelParams) -> Result<BoundValue, BoundError> {
    check_non_negative("r", r)?;
    Ok(BoundValue::new(
        ppp_hit_probability(params.equivalent_density(), PI * r * r),
        BoundKind::ApproxEquiv,
    ))
}

/// Upper limit of `theta`, reached at `r_y = 0`.
pub const THETA_MAX: f64 = FRAC_PI_2;
