//! Model parameters, homogeneous PPP sampling on disks, hole carving and
//! nearest-point queries.
//!
//! All lengths are meters and all densities are points per square meter.
//! Unit conversion from user-facing strings lives in [`crate::units`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be finite and non-negative, got {value}")]
    NegativeOrNonFinite { name: &'static str, value: f64 },
    #[error("{name} must be finite and positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("point ({x}, {y}) lies outside the window")]
    OutsideWindow { x: f64, y: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ParamError::NegativeOrNonFinite { name, value })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ParamError::NonPositive { name, value })
    }
}

/// The triple (hole-center density, baseline density, hole radius) in
/// canonical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    lambda1: f64,
    lambda2: f64,
    d_hole: f64,
}

impl ModelParams {
    pub fn new(lambda1: f64, lambda2: f64, d_hole: f64) -> Result<Self, ParamError> {
        Ok(Self {
            lambda1: check_non_negative("lambda1", lambda1)?,
            lambda2: check_non_negative("lambda2", lambda2)?,
            d_hole: check_non_negative("d_hole", d_hole)?,
        })
    }

    /// Hole-center density (points / m²).
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    /// Baseline density (points / m²).
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Hole radius (m).
    pub fn d_hole(&self) -> f64 {
        self.d_hole
    }

    /// Probability that a typical baseline point survives carving,
    /// `exp(-lambda1 * pi * D^2)`.
    pub fn retention(&self) -> f64 {
        (-self.lambda1 * PI * self.d_hole * self.d_hole).exp()
    }

    /// Mean density of the hole process, `lambda2 * retention()`.
    pub fn equivalent_density(&self) -> f64 {
        self.lambda2 * self.retention()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

/// Closed disk used as a sampling window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Result<Self, ParamError> {
        check_positive("window radius", radius)?;
        Ok(Self { center, radius })
    }

    pub fn centered(radius: f64) -> Result<Self, ParamError> {
        Self::new(Point::ORIGIN, radius)
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.center.distance(p) <= self.radius
    }
}

/// Finite planar point pattern together with the window it was drawn on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Point>,
    window: Disk,
}

impl PointSet {
    pub fn new(points: Vec<Point>, window: Disk) -> Result<Self, ParamError> {
        if let Some(p) = points.iter().find(|p| !window.contains(p)) {
            return Err(ParamError::OutsideWindow { x: p.x, y: p.y });
        }
        Ok(Self { points, window })
    }

    pub fn empty(window: Disk) -> Self {
        Self {
            points: Vec::new(),
            window,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn window(&self) -> &Disk {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Grows the window to `outer`, which must share the current center,
    /// and appends `extra` points that lie in the added annulus.
    pub(crate) fn extend(&mut self, extra: Vec<Point>, outer: Disk) {
        debug_assert!(outer.center == self.window.center && outer.radius >= self.window.radius);
        self.window = outer;
        self.points.extend(extra);
    }
}

/// Simulation window: baseline points are drawn on a disk of `radius`,
/// hole centers on a disk of `radius + hole_margin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimWindow {
    radius: f64,
    hole_margin: f64,
}

impl SimWindow {
    pub fn new(radius: f64, hole_margin: f64, d_hole: f64) -> Result<Self, ParamError> {
        check_positive("window radius", radius)?;
        check_non_negative("hole margin", hole_margin)?;
        if hole_margin < d_hole {
            return Err(ParamError::Invalid(format!(
                "hole margin {hole_margin} is smaller than the hole radius {d_hole}"
            )));
        }
        Ok(Self {
            radius,
            hole_margin,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn hole_margin(&self) -> f64 {
        self.hole_margin
    }

    pub fn baseline_disk(&self) -> Disk {
        Disk {
            center: Point::ORIGIN,
            radius: self.radius,
        }
    }

    pub fn hole_disk(&self) -> Disk {
        Disk {
            center: Point::ORIGIN,
            radius: self.radius + self.hole_margin,
        }
    }
}

/// Draws a homogeneous PPP of `intensity` restricted to the annulus
/// `inner < |x - center| <= outer`, consuming randomness from `rng`.
///
/// `inner = 0` gives the full disk. Radii are drawn by inverting the
/// radial CDF, so no rejection is involved.
pub(crate) fn sample_annulus<R: Rng + ?Sized>(
    rng: &mut R,
    intensity: f64,
    center: Point,
    inner: f64,
    outer: f64,
) -> Vec<Point> {
    debug_assert!(outer >= inner && inner >= 0.0);
    let area = PI * (outer * outer - inner * inner);
    let mean = intensity * area;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let count = Poisson::new(mean)
        .expect("positive finite Poisson mean")
        .sample(rng) as usize;
    let inner_sq = inner * inner;
    let span_sq = outer * outer - inner_sq;
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let phi = rng.random::<f64>() * 2.0 * PI;
            // Guard against rounding pushing the point outside the window.
            let rho = (inner_sq + u * span_sq).sqrt().min(outer);
            Point::new(center.x + rho * phi.cos(), center.y + rho * phi.sin())
        })
        .collect()
}

pub(crate) fn sample_ppp_with<R: Rng + ?Sized>(
    rng: &mut R,
    intensity: f64,
    window: Disk,
) -> PointSet {
    let points = sample_annulus(rng, intensity, window.center, 0.0, window.radius);
    PointSet { points, window }
}

/// Samples a homogeneous Poisson point process of `intensity` on `window`.
///
/// The output is a deterministic function of `(intensity, window, seed)`.
pub fn sample_ppp(intensity: f64, window: Disk, seed: u64) -> Result<PointSet, ParamError> {
    check_non_negative("intensity", intensity)?;
    check_positive("window radius", window.radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_ppp_with(&mut rng, intensity, window))
}

/// Keeps the baseline points that are farther than `d_hole` from every hole
/// center. A point at distance exactly `d_hole` is removed.
pub fn build_php(
    baseline: &PointSet,
    hole_centers: &PointSet,
    d_hole: f64,
) -> Result<PointSet, ParamError> {
    check_non_negative("d_hole", d_hole)?;
    let d_sq = d_hole * d_hole;
    let points = baseline
        .points
        .iter()
        .filter(|x| hole_centers.points.iter().all(|y| x.distance_sq(y) > d_sq))
        .copied()
        .collect();
    Ok(PointSet {
        points,
        window: baseline.window,
    })
}

/// Distance from `origin` to the closest point of `ps`, or `None` when the
/// set is empty.
pub fn nearest_distance(ps: &PointSet, origin: Point) -> Option<f64> {
    ps.points
        .iter()
        .map(|p| p.distance_sq(&origin))
        .min_by(f64::total_cmp)
        .map(f64::sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_window() -> Disk {
        Disk::centered(10.0).unwrap()
    }

    #[test]
    fn params_reject_negative_and_nan() {
        assert!(ModelParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, f64::INFINITY).is_err());
        assert!(ModelParams::new(0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn zero_intensity_is_empty() {
        let ps = sample_ppp(0.0, unit_window(), 7).unwrap();
        assert!(ps.is_empty());
        assert_eq!(ps.window(), &unit_window());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_ppp(0.3, unit_window(), 42).unwrap();
        let b = sample_ppp(0.3, unit_window(), 42).unwrap();
        assert_eq!(a, b);
        let c = sample_ppp(0.3, unit_window(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_points_lie_in_window() {
        let w = Disk::new(Point::new(3.0, -2.0), 5.0).unwrap();
        let ps = sample_ppp(2.0, w, 1).unwrap();
        assert!(ps.len() > 50);
        assert!(ps.points().iter().all(|p| w.contains(p)));
    }

    #[test]
    fn sampling_rejects_bad_intensity() {
        assert!(sample_ppp(-1.0, unit_window(), 0).is_err());
        assert!(sample_ppp(f64::NAN, unit_window(), 0).is_err());
    }

    #[test]
    fn point_set_validates_membership() {
        assert!(PointSet::new(vec![Point::new(11.0, 0.0)], unit_window()).is_err());
        assert!(PointSet::new(vec![Point::new(10.0, 0.0)], unit_window()).is_ok());
    }

    #[test]
    fn no_holes_keeps_everything() {
        let base = sample_ppp(0.5, unit_window(), 3).unwrap();
        let holes = PointSet::empty(unit_window());
        assert_eq!(build_php(&base, &holes, 2.0).unwrap(), base);
    }

    #[test]
    fn point_at_hole_center_removed_for_any_radius() {
        let base = PointSet::new(vec![Point::ORIGIN], unit_window()).unwrap();
        let holes = PointSet::new(vec![Point::ORIGIN], unit_window()).unwrap();
        for d in [0.0, 0.5, 3.0] {
            assert!(build_php(&base, &holes, d).unwrap().is_empty());
        }
    }

    #[test]
    fn closed_ball_rule() {
        let base = PointSet::new(
            vec![Point::new(0.5, 0.0), Point::new(0.0, 1.0), Point::new(-1.5, 0.0)],
            unit_window(),
        )
        .unwrap();
        let holes = PointSet::new(vec![Point::ORIGIN], unit_window()).unwrap();
        let php = build_php(&base, &holes, 1.0).unwrap();
        assert_eq!(php.points(), &[Point::new(-1.5, 0.0)]);
        assert_eq!(php.window(), base.window());
    }

    #[test]
    fn nearest_distance_basics() {
        assert_eq!(nearest_distance(&PointSet::empty(unit_window()), Point::ORIGIN), None);
        let ps = PointSet::new(vec![Point::new(3.0, 4.0)], unit_window()).unwrap();
        assert_eq!(nearest_distance(&ps, Point::ORIGIN), Some(5.0));
    }

    #[test]
    fn sim_window_requires_margin() {
        assert!(SimWindow::new(100.0, 10.0, 20.0).is_err());
        let w = SimWindow::new(100.0, 20.0, 20.0).unwrap();
        assert_eq!(w.hole_disk().radius, 120.0);
    }
}
