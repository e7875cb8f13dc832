//! Time-robust Signal Temporal Logic for piecewise-linear trajectories.
//!
//! The crate covers the whole pipeline:
//!
//! * [`stl`]: formula AST, DSL parser and printer, structural statistics;
//! * [`geometry`]: convex regions, PWL trajectories, segment-level predicates;
//! * [`monitor`]: qualitative and time-robustness evaluators with a naive
//!   reference evaluator and a soundness checker;
//! * [`milp`]: a solver-agnostic MILP model with the big-M gadgets;
//! * [`encoder`]: translation of a synthesis problem into a MILP;
//! * [`solver`]: exact branch-and-bound, LP export and solution import;
//! * [`mission`], [`svg`], [`bench`]: file formats, plotting and the
//!   benchmark library used by the CLI.
//!
//! Geometry and monitoring are generic over [`Scalar`]; use the `f64`
//! aliases for speed or the [`Rational`] ones for exact sign tests.

pub mod bench;
pub mod encoder;
pub mod geometry;
pub mod milp;
pub mod mission;
pub mod monitor;
pub mod scalar;
pub mod solver;
pub mod stl;
pub mod svg;
pub mod synthesis;

pub use scalar::Scalar;

/// Arbitrary-precision rational used for exact monitoring.
pub type Rational = num_rational::BigRational;

pub type Waypoint64 = geometry::Waypoint<f64>;
pub type WaypointQ = geometry::Waypoint<Rational>;
pub type Trajectory64 = geometry::PwlTrajectory<f64>;
pub type TrajectoryQ = geometry::PwlTrajectory<Rational>;
pub type Region64 = geometry::ConvexRegion<f64>;
pub type RegionQ = geometry::ConvexRegion<Rational>;
pub type Robustness64 = monitor::Robustness<f64>;
pub type RobustnessQ = monitor::Robustness<Rational>;
