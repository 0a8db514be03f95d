//! Collision-aware quadratic Bezier smoothing.
//!
//! Every interior waypoint becomes a corner arc: two temporary control
//! points are placed on the adjacent segments, the corner is replaced by the
//! quadratic arc they span, and the arc is sampled densely and checked
//! against every inflated obstacle. A colliding arc has its corner offset
//! halved and is retried; after six halvings the sharp corner is kept, so a
//! feasible input path always yields a feasible smoothed path.

use crate::geometry::{Ellipse, Point2};
use crate::stig::PlannedPath;
use crate::world::PlannerParams;

/// Maximum spacing between consecutive polyline samples, meters.
pub const SAMPLE_STEP: f64 = 0.25;
/// Clearance tolerance for sampled points, in ellipse-equation units.
pub const CLEARANCE_EPS: f64 = 1e-6;
/// Offset halvings before a corner is kept sharp.
const MAX_HALVINGS: u32 = 6;
/// Collision checks sample finer than the emitted polyline and demand this
/// much positive clearance (equation units), covering the sag of the arc
/// between check samples; an arc running tangent to a boundary is rejected
/// rather than accepted on the strength of its sample points alone.
const CHECK_STEP: f64 = 0.05;
const CHECK_MARGIN: f64 = 5e-4;

/// A smoothed polyline, its source path, and the corner offsets that
/// survived collision checking (zero marks a corner kept sharp).
#[derive(Debug, Clone)]
pub struct SmoothedPath {
    pub polyline: Vec<Point2>,
    pub source: PlannedPath,
    pub corner_offsets: Vec<f64>,
}

/// Quadratic Bezier point: `(1-t)^2 p0 + 2(1-t)t p1 + t^2 p2`.
#[inline]
pub fn bezier_point(p0: Point2, p1: Point2, p2: Point2, t: f64) -> Point2 {
    let u = 1.0 - t;
    let w0 = u * u;
    let w1 = 2.0 * u * t;
    let w2 = t * t;
    Point2::new(
        w0 * p0.x + w1 * p1.x + w2 * p2.x,
        w0 * p0.y + w1 * p1.y + w2 * p2.y,
    )
}

/// Temporary control points around the corner `a`: one on the segment toward
/// `prev`, one toward `next`, each at `offset` from `a` but never past the
/// segment midpoint, so adjacent corners cannot overlap.
pub fn control_points(prev: Point2, a: Point2, next: Point2, offset: f64) -> (Point2, Point2) {
    let back = prev.sub(a);
    let fwd = next.sub(a);
    let d_back = offset.min(back.norm() / 2.0);
    let d_fwd = offset.min(fwd.norm() / 2.0);
    (
        a.add(back.scale(d_back / back.norm())),
        a.add(fwd.scale(d_fwd / fwd.norm())),
    )
}

fn sample_arc(p0: Point2, p1: Point2, p2: Point2, out: &mut Vec<Point2>) {
    // The control polygon bounds the arc length from above.
    let polygon = p0.distance_to(p1) + p1.distance_to(p2);
    let steps = (polygon / SAMPLE_STEP).ceil().max(1.0) as usize;
    for i in 1..=steps {
        out.push(bezier_point(p0, p1, p2, i as f64 / steps as f64));
    }
}

fn arc_is_clear(p0: Point2, p1: Point2, p2: Point2, obstacles: &[Ellipse]) -> bool {
    let polygon = p0.distance_to(p1) + p1.distance_to(p2);
    let steps = (polygon / CHECK_STEP).ceil().max(1.0) as usize;
    (0..=steps).all(|i| {
        let p = bezier_point(p0, p1, p2, i as f64 / steps as f64);
        obstacles.iter().all(|e| e.value(p) >= 1.0 + CHECK_MARGIN)
    })
}

/// Appends the straight run `from -> to` sampled at the polyline step,
/// excluding `from` (already present).
fn sample_segment(from: Point2, to: Point2, out: &mut Vec<Point2>) {
    let steps = (from.distance_to(to) / SAMPLE_STEP).ceil().max(1.0) as usize;
    for i in 1..=steps {
        out.push(from.lerp(to, i as f64 / steps as f64));
    }
}

/// Smooths a successful path. Corner arcs that would collide fall back to
/// smaller offsets and ultimately to the sharp corner, so the result is
/// always collision-free and never longer than the source polyline.
pub fn smooth_path(
    path: &PlannedPath,
    obstacles: &[Ellipse],
    params: &PlannerParams,
) -> SmoothedPath {
    assert!(
        path.is_success(),
        "smoothing requires a successful source path"
    );
    let pts = &path.waypoints;
    let mut polyline = vec![pts[0]];
    let mut corner_offsets = Vec::new();
    // End of the previous corner's arc (or the start point): the cursor from
    // which the next straight run begins.
    let mut cursor = pts[0];

    for i in 1..pts.len().saturating_sub(1) {
        let (prev, a, next) = (pts[i - 1], pts[i], pts[i + 1]);
        let corner = a
            .sub(prev)
            .cross(next.sub(a))
            .abs()
            .atan2(a.sub(prev).dot(next.sub(a)));
        let default_offset = (params.d_vir + params.r_safe)
            .min(prev.distance_to(a) / 2.0)
            .min(a.distance_to(next) / 2.0);

        let mut applied = 0.0;
        if corner > 1e-9 && default_offset > 0.0 {
            let mut offset = default_offset;
            for _ in 0..=MAX_HALVINGS {
                let (c0, c2) = control_points(prev, a, next, offset);
                if arc_is_clear(c0, a, c2, obstacles) {
                    applied = offset;
                    sample_segment(cursor, c0, &mut polyline);
                    sample_arc(c0, a, c2, &mut polyline);
                    cursor = c2;
                    break;
                }
                offset /= 2.0;
            }
        }
        if applied == 0.0 {
            // Sharp corner kept: straight run up to the waypoint itself.
            sample_segment(cursor, a, &mut polyline);
            cursor = a;
        }
        corner_offsets.push(applied);
    }

    let target = *pts.last().expect("successful paths have waypoints");
    if cursor != target {
        sample_segment(cursor, target, &mut polyline);
    }
    SmoothedPath {
        polyline,
        source: path.clone(),
        corner_offsets,
    }
}
