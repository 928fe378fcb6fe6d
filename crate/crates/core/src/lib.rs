//! Poisson hole process toolkit: sampling, analytic lower and upper bounds
//! on the contact-distance CDF, and Monte Carlo validation of those bounds.

pub mod bounds;
pub mod cli;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod units;

pub use bounds::{BoundKind, BoundValue, PartitionScheme};
pub use model::{ModelParams, Point, PointSet, SimWindow};
pub use montecarlo::{EmpiricalCdf, RefCase, SimConfig, WindowPolicy};
pub use quadrature::{QuadResult, Tolerance};
