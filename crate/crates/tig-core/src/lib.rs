//! Tangent-intersection guidance path planning over elliptic obstacles.
//!
//! The toolkit plans 2D paths around safety-inflated rotated ellipses by
//! drawing tangent lines to the first blocking obstacle and placing
//! waypoints on a slightly enlarged virtual ellipse, selected by a
//! distance-plus-blockage heuristic. It ships a static planner, two dynamic
//! planners driven by a circular-range sensor, quadratic Bezier smoothing, a
//! grid A* baseline, seeded map generation, and path metrics.

pub mod baseline;
pub mod dtig;
pub mod geometry;
pub mod metrics;
pub mod rng;
pub mod smoothing;
pub mod stig;
pub mod world;

pub use geometry::{Ellipse, Point2};
pub use stig::{PlanStatus, PlannedPath};
pub use world::{MapFamily, MapSpec, PlannerParams, Scenario};
