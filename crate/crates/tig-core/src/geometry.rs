//! 2D primitives for rotated, safety-inflated elliptic obstacles.
//!
//! Everything here is exact-as-practical closed-form arithmetic: ellipse
//! membership, segment intersection via the quadratic in the ellipse-local
//! unit-circle frame, external tangent points, waypoint construction on an
//! enlarged "virtual" ellipse, and circle clamping for sensor-range motion.
//!
//! All functions are pure; obstacles are immutable values.

use thiserror::Error;

/// Tangency threshold on the quadratic discriminant after dividing by the
/// leading coefficient.
pub const TANGENCY_EPS: f64 = 1e-9;

/// Parameter floor below which a segment hit counts as starting "at" the
/// segment origin.
pub const ENTRY_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point ({x}, {y}) is inside or on the inflated obstacle boundary")]
    PointInsideObstacle { x: f64, y: f64 },
    #[error("tangent line does not intersect the virtual ellipse (numerical failure)")]
    NoIntersection,
    #[error("clamp preconditions violated: |p0-center|={d0}, |p1-center|={d1}, r={r}")]
    InvalidClamp { d0: f64, d1: f64, r: f64 },
}

/// A point (or displacement) in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[allow(clippy::should_implement_trait)]
    #[inline]
    pub fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    #[allow(clippy::should_implement_trait)]
    #[inline]
    pub fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    #[inline]
    pub fn scale(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }

    #[inline]
    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product, positive when `o` is counterclockwise
    /// from `self`.
    #[inline]
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn distance_to(self, o: Point2) -> f64 {
        self.sub(o).norm()
    }

    /// Point at parameter `t` on the segment `self -> o`.
    #[inline]
    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        Point2::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A rotated elliptic obstacle with safety inflation.
///
/// Membership and collision tests always apply to the inflated boundary with
/// semi-axes `a + r_safe` and `b + r_safe`; the raw `a`/`b` describe the
/// physical obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    /// Center x, meters.
    pub cx: f64,
    /// Center y, meters.
    pub cy: f64,
    /// Semi-major axis, meters (`a >= b > 0`).
    pub a: f64,
    /// Semi-minor axis, meters.
    pub b: f64,
    /// Counterclockwise rotation from the positive x-axis, radians, in `[0, pi)`.
    pub theta: f64,
    /// Safety inflation added to both semi-axes, meters (`>= 0`).
    pub r_safe: f64,
}

impl Ellipse {
    /// Builds an ellipse, normalizing `theta` into `[0, pi)` (0 for circles,
    /// where rotation is meaningless).
    pub fn new(cx: f64, cy: f64, a: f64, b: f64, theta: f64, r_safe: f64) -> Self {
        let theta = if a == b { 0.0 } else { normalize_angle(theta) };
        Self {
            cx,
            cy,
            a,
            b,
            theta,
            r_safe,
        }
    }

    pub fn circle(cx: f64, cy: f64, radius: f64, r_safe: f64) -> Self {
        Self::new(cx, cy, radius, radius, 0.0, r_safe)
    }

    #[inline]
    pub fn center(&self) -> Point2 {
        Point2::new(self.cx, self.cy)
    }

    /// Inflated semi-major axis.
    #[inline]
    pub fn semi_major(&self) -> f64 {
        self.a + self.r_safe
    }

    /// Inflated semi-minor axis.
    #[inline]
    pub fn semi_minor(&self) -> f64 {
        self.b + self.r_safe
    }

    /// The same obstacle with `extra` meters of additional inflation; the
    /// virtual ellipse used for waypoint construction.
    #[inline]
    pub fn enlarged(&self, extra: f64) -> Ellipse {
        Ellipse {
            r_safe: self.r_safe + extra,
            ..*self
        }
    }

    /// Straight-line violations of the type invariants, for validation reports.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.a <= 0.0 || self.a.is_nan() {
            v.push(format!("semi-major axis must be positive, got {}", self.a));
        }
        if self.b <= 0.0 || self.b.is_nan() {
            v.push(format!("semi-minor axis must be positive, got {}", self.b));
        }
        if self.a < self.b {
            v.push(format!(
                "semi-major axis {} is smaller than semi-minor axis {}",
                self.a, self.b
            ));
        }
        if self.r_safe < 0.0 || self.r_safe.is_nan() {
            v.push(format!(
                "safety inflation must be >= 0, got {}",
                self.r_safe
            ));
        }
        if !self.theta.is_finite() || !(0.0..std::f64::consts::PI).contains(&self.theta) {
            v.push(format!("rotation must lie in [0, pi), got {}", self.theta));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            v.push("center coordinates must be finite".to_string());
        }
        v
    }

    /// Maps a world point into the frame where the inflated ellipse is the
    /// unit circle: translate to the center, rotate by `-theta`, divide by the
    /// inflated semi-axes.
    #[inline]
    pub fn to_unit_frame(&self, p: Point2) -> Point2 {
        let dx = p.x - self.cx;
        let dy = p.y - self.cy;
        let (sin_t, cos_t) = self.theta.sin_cos();
        let lx = dx * cos_t + dy * sin_t;
        let ly = -dx * sin_t + dy * cos_t;
        Point2::new(lx / self.semi_major(), ly / self.semi_minor())
    }

    /// Inverse of [`Ellipse::to_unit_frame`].
    #[inline]
    pub fn from_unit_frame(&self, q: Point2) -> Point2 {
        let lx = q.x * self.semi_major();
        let ly = q.y * self.semi_minor();
        let (sin_t, cos_t) = self.theta.sin_cos();
        Point2::new(
            self.cx + lx * cos_t - ly * sin_t,
            self.cy + lx * sin_t + ly * cos_t,
        )
    }

    /// Left-hand side of the inflated-ellipse equation at `p`: `< 1` strictly
    /// inside, `= 1` on the boundary, `> 1` outside.
    #[inline]
    pub fn value(&self, p: Point2) -> f64 {
        self.to_unit_frame(p).norm_sq()
    }

    /// Point on the inflated boundary at parametric angle `phi`.
    #[inline]
    pub fn boundary_point(&self, phi: f64) -> Point2 {
        self.from_unit_frame(Point2::new(phi.cos(), phi.sin()))
    }

    /// Intersections of the segment `p0 -> p1` with the inflated boundary:
    /// 0, 1 (tangential) or 2 hits sorted by parameter `t in [0, 1]`.
    ///
    /// Tangency is a normalized discriminant within [`TANGENCY_EPS`] of zero.
    pub fn segment_intersections(&self, p0: Point2, p1: Point2) -> Vec<SegmentHit> {
        let mut hits = Vec::new();
        match self.line_roots(p0, p1) {
            LineRoots::None => {}
            LineRoots::Tangent(t) => {
                if (0.0..=1.0).contains(&t) {
                    hits.push(SegmentHit::on_segment(p0, p1, t));
                }
            }
            LineRoots::Crossing(t0, t1) => {
                for t in [t0, t1] {
                    if (0.0..=1.0).contains(&t) {
                        hits.push(SegmentHit::on_segment(p0, p1, t));
                    }
                }
            }
        }
        hits
    }

    /// True when the open segment `p0 -> p1` passes through the strict
    /// interior of the inflated ellipse. Tangential grazing does not count:
    /// the collision boundary is open.
    pub fn segment_collides(&self, p0: Point2, p1: Point2) -> bool {
        match self.line_roots(p0, p1) {
            LineRoots::None | LineRoots::Tangent(_) => false,
            LineRoots::Crossing(t0, t1) => t0.max(0.0) < t1.min(1.0),
        }
    }

    /// Real roots of the inflated-ellipse quadratic along the infinite line
    /// through `p0` and `p1`, parameterized so that `t=0` is `p0`, `t=1` is `p1`.
    fn line_roots(&self, p0: Point2, p1: Point2) -> LineRoots {
        let q0 = self.to_unit_frame(p0);
        let q1 = self.to_unit_frame(p1);
        let d = q1.sub(q0);
        let lead = d.norm_sq();
        if lead == 0.0 {
            return LineRoots::None;
        }
        // Normalized coefficients: t^2 + b t + c = 0.
        let b = 2.0 * q0.dot(d) / lead;
        let c = (q0.norm_sq() - 1.0) / lead;
        let disc = b * b - 4.0 * c;
        if disc.abs() < TANGENCY_EPS {
            LineRoots::Tangent(-b / 2.0)
        } else if disc < 0.0 {
            LineRoots::None
        } else {
            let s = disc.sqrt();
            LineRoots::Crossing((-b - s) / 2.0, (-b + s) / 2.0)
        }
    }

    /// The two points where lines through the external point `p` touch the
    /// inflated boundary.
    ///
    /// Computed in the unit-circle frame in closed form and mapped back.
    /// Ordering is deterministic: the first point is the one for which the
    /// ellipse center lies to the left of the ray `p -> tangent point`.
    pub fn tangent_points_from(&self, p: Point2) -> Result<(Point2, Point2), GeometryError> {
        let q = self.to_unit_frame(p);
        let qq = q.norm_sq();
        if qq <= 1.0 {
            return Err(GeometryError::PointInsideObstacle { x: p.x, y: p.y });
        }
        // Unit-circle tangency: t·q = 1, |t| = 1.
        let beta = (qq - 1.0).sqrt() / qq;
        let base = q.scale(1.0 / qq);
        let perp = Point2::new(-q.y, q.x);
        let t_left = self.from_unit_frame(base.add(perp.scale(beta)));
        let t_right = self.from_unit_frame(base.sub(perp.scale(beta)));
        // The affine map back preserves orientation, but order by the world
        // frame cross product so the contract is explicit.
        let to_center = self.center().sub(p);
        if t_left.sub(p).cross(to_center) >= 0.0 {
            Ok((t_left, t_right))
        } else {
            Ok((t_right, t_left))
        }
    }

    /// Waypoint on the virtual ellipse (`extra_inflation` more meters on both
    /// semi-axes): the intersection of the infinite tangent line through `p`
    /// and `tangent_pt` with the virtual boundary that lies beyond the
    /// tangent point, i.e. the one farther from `p` along the subpath.
    pub fn virtual_waypoint(
        &self,
        p: Point2,
        tangent_pt: Point2,
        extra_inflation: f64,
    ) -> Result<Point2, GeometryError> {
        let virt = self.enlarged(extra_inflation);
        let q0 = virt.to_unit_frame(p);
        let q1 = virt.to_unit_frame(tangent_pt);
        let d = q1.sub(q0);
        let lead = d.norm_sq();
        if lead == 0.0 {
            return Err(GeometryError::NoIntersection);
        }
        let b = 2.0 * q0.dot(d) / lead;
        let c = (q0.norm_sq() - 1.0) / lead;
        let disc = b * b - 4.0 * c;
        if disc < 0.0 {
            return Err(GeometryError::NoIntersection);
        }
        let s = (-b + disc.sqrt()) / 2.0;
        Ok(p.lerp(tangent_pt, s))
    }
}

/// A segment/ellipse intersection: parameter along the segment, the hit point,
/// and the index of the obstacle that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentHit {
    /// Position along the segment, in `[0, 1]`.
    pub t: f64,
    pub point: Point2,
    pub obstacle_id: usize,
}

impl SegmentHit {
    fn on_segment(p0: Point2, p1: Point2, t: f64) -> Self {
        Self {
            t,
            point: p0.lerp(p1, t),
            obstacle_id: 0,
        }
    }
}

enum LineRoots {
    None,
    Tangent(f64),
    Crossing(f64, f64),
}

fn normalize_angle(theta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut t = theta % pi;
    if t < 0.0 {
        t += pi;
    }
    // `theta % pi` can round to pi itself for inputs just below a multiple.
    if t >= pi {
        t = 0.0;
    }
    t
}

/// Evaluates the inflated-ellipse equation; `< 1` inside, `1` boundary,
/// `> 1` outside.
#[inline]
pub fn ellipse_value(p: Point2, e: &Ellipse) -> f64 {
    e.value(p)
}

/// True when the segment penetrates no obstacle interior.
pub fn segment_clear(p0: Point2, p1: Point2, obstacles: &[Ellipse]) -> bool {
    obstacles.iter().all(|e| !e.segment_collides(p0, p1))
}

/// True when `p` is strictly inside some inflated obstacle.
pub fn point_blocked(p: Point2, obstacles: &[Ellipse]) -> bool {
    obstacles.iter().any(|e| e.value(p) < 1.0)
}

/// Among obstacles the segment actually crosses, the one whose first hit with
/// `t > ENTRY_EPS` comes earliest; ties go to the lower obstacle index.
/// `None` when the segment is clear.
pub fn first_collided_obstacle(
    p0: Point2,
    p1: Point2,
    obstacles: &[Ellipse],
) -> Option<(usize, SegmentHit)> {
    let mut best: Option<(usize, SegmentHit)> = None;
    for (id, e) in obstacles.iter().enumerate() {
        if !e.segment_collides(p0, p1) {
            continue;
        }
        let entry = e
            .segment_intersections(p0, p1)
            .into_iter()
            .find(|h| h.t > ENTRY_EPS);
        if let Some(mut hit) = entry {
            hit.obstacle_id = id;
            let better = match &best {
                Some((_, b)) => hit.t < b.t,
                None => true,
            };
            if better {
                best = Some((id, hit));
            }
        }
    }
    best
}

/// The unique point on the segment `p0 -> p1` at distance exactly `r` from
/// `center`, given `p0` inside/on the circle and `p1` outside.
pub fn clamp_to_range(
    center: Point2,
    r: f64,
    p0: Point2,
    p1: Point2,
) -> Result<Point2, GeometryError> {
    let d0 = p0.distance_to(center);
    let d1 = p1.distance_to(center);
    if d0 > r + 1e-9 || d1 <= r {
        return Err(GeometryError::InvalidClamp { d0, d1, r });
    }
    let d = p1.sub(p0);
    let f = p0.sub(center);
    let lead = d.norm_sq();
    let b = 2.0 * f.dot(d) / lead;
    let c = (f.norm_sq() - r * r) / lead;
    let disc = b * b - 4.0 * c;
    // d0 <= r < d1 guarantees a real crossing; disc can only dip below zero
    // by rounding when p0 sits on the circle itself.
    let t = if disc <= 0.0 {
        -b / 2.0
    } else {
        (-b + disc.sqrt()) / 2.0
    };
    Ok(p0.lerp(p1, t.clamp(0.0, 1.0)))
}
