//! Path quality metrics: Euclidean length, total turning angle, and timing
//! capture, plus the CSV row format used by the benchmark harness.

use thiserror::Error;

use crate::dtig::{ExecutionTrace, RunStatus};
use crate::geometry::Point2;
use crate::stig::{PlanStatus, PlannedPath};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("zero-length segment at vertex ({x}, {y})")]
    DegenerateVertex { x: f64, y: f64 },
}

/// Sum of Euclidean segment lengths.
pub fn path_length(points: &[Point2]) -> f64 {
    points.windows(2).map(|w| w[0].distance_to(w[1])).sum()
}

/// Absolute heading change at `p` between the incoming direction
/// (`p - p_prev`) and the outgoing direction (`p_next - p`), in `[0, pi]`.
///
/// Computed from the cross/dot arctangent rather than the slope-difference
/// form: the two agree whenever the change is below `pi/2` and no segment is
/// vertical, but the slope form is undefined on vertical segments and reports
/// zero for full reversals, which must be penalized instead.
pub fn turning_angle(p_prev: Point2, p: Point2, p_next: Point2) -> Result<f64, MetricsError> {
    let d1 = p.sub(p_prev);
    let d2 = p_next.sub(p);
    if d1.norm_sq() == 0.0 || d2.norm_sq() == 0.0 {
        return Err(MetricsError::DegenerateVertex { x: p.x, y: p.y });
    }
    Ok(d1.cross(d2).abs().atan2(d1.dot(d2)))
}

/// Sum of turning angles over the interior vertices; zero for two-point
/// paths. Consecutive duplicate points are skipped so that densely sampled
/// polylines with repeated vertices do not fault.
pub fn total_turning(points: &[Point2]) -> f64 {
    let mut deduped: Vec<Point2> = Vec::with_capacity(points.len());
    for &p in points {
        if deduped.last() != Some(&p) {
            deduped.push(p);
        }
    }
    deduped
        .windows(3)
        .map(|w| turning_angle(w[0], w[1], w[2]).expect("deduplicated vertices"))
        .fold(0.0, |acc, t| acc + t)
}

/// One benchmark record: length, total turning, planning wall-clock time,
/// node count and final status.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub path_length: Option<f64>,
    pub total_turning: Option<f64>,
    pub plan_time_s: f64,
    pub node_count: usize,
    pub status: String,
}

impl MetricsRecord {
    /// Metrics for a static plan; `plan_time_s` is measured by the caller
    /// around the planning call only.
    pub fn from_planned(path: &PlannedPath, plan_time_s: f64) -> Self {
        match path.status {
            PlanStatus::Success => Self {
                path_length: Some(path_length(&path.waypoints)),
                total_turning: Some(total_turning(&path.waypoints)),
                plan_time_s,
                node_count: path.waypoints.len(),
                status: path.status.to_string(),
            },
            PlanStatus::Failure(_) => Self {
                path_length: None,
                total_turning: None,
                plan_time_s,
                node_count: path.waypoints.len(),
                status: path.status.to_string(),
            },
        }
    }

    /// Metrics for a dynamic run: executed-path length and cumulative
    /// planning time across replans, as accumulated in the trace.
    pub fn from_trace(trace: &ExecutionTrace) -> Self {
        match trace.final_status {
            RunStatus::Reached => Self {
                path_length: Some(path_length(&trace.executed_path)),
                total_turning: Some(total_turning(&trace.executed_path)),
                plan_time_s: trace.plan_time_s,
                node_count: trace.executed_path.len(),
                status: trace.final_status.to_string(),
            },
            RunStatus::Failed(_) => Self {
                path_length: None,
                total_turning: None,
                plan_time_s: trace.plan_time_s,
                node_count: trace.executed_path.len(),
                status: trace.final_status.to_string(),
            },
        }
    }

    pub fn csv_header() -> &'static str {
        "case_id,algo,map_family,seed,status,path_length_m,total_turning_rad,plan_time_s,node_count"
    }

    /// One CSV row; floating-point columns use six decimal places, absent
    /// values (failed runs) are written as `NA`.
    pub fn csv_row(&self, case_id: &str, algo: &str, map_family: &str, seed: u64) -> String {
        let opt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.6}"),
            None => "NA".to_string(),
        };
        format!(
            "{case_id},{algo},{map_family},{seed},{status},{length},{turning},{time:.6},{nodes}",
            status = self.status,
            length = opt(self.path_length),
            turning = opt(self.total_turning),
            time = self.plan_time_s,
            nodes = self.node_count,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn pts(coords: &[(f64, f64)]) -> Vec<Point2> {
        coords.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn length_examples() {
        assert_eq!(path_length(&pts(&[(0.0, 0.0), (3.0, 4.0)])), 5.0);
        assert_eq!(
            path_length(&pts(&[(0.0, 0.0), (3.0, 4.0), (3.0, 8.0)])),
            9.0
        );
        let fwd = pts(&[(0.0, 0.0), (1.0, 2.0), (5.0, -1.0)]);
        let mut rev = fwd.clone();
        rev.reverse();
        assert_eq!(path_length(&fwd), path_length(&rev));
        // Never shorter than the straight line between the endpoints.
        assert!(path_length(&fwd) >= fwd[0].distance_to(fwd[2]));
    }

    #[test]
    fn turning_angle_examples() {
        let z = Point2::new(0.0, 0.0);
        assert_eq!(
            turning_angle(z, Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)).unwrap(),
            0.0
        );
        let t = turning_angle(z, Point2::new(1.0, 0.0), Point2::new(2.0, 1.0)).unwrap();
        assert!((t - FRAC_PI_4).abs() < 1e-12);
        // Vertical first segment: the slope form is undefined here, the
        // heading form still reports pi/2 - pi/4.
        let t = turning_angle(z, Point2::new(0.0, 1.0), Point2::new(1.0, 2.0)).unwrap();
        assert!((t - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn turning_angle_rejects_degenerate_vertex() {
        let p = Point2::new(1.0, 1.0);
        assert!(turning_angle(p, p, Point2::new(2.0, 2.0)).is_err());
    }

    #[test]
    fn turning_angle_penalizes_reversal() {
        let t = turning_angle(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 0.0),
        )
        .unwrap();
        assert!((t - PI).abs() < 1e-12);
    }

    #[test]
    fn total_turning_examples() {
        assert_eq!(total_turning(&pts(&[(0.0, 0.0), (10.0, 0.0)])), 0.0);
        let two_corners = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (3.0, 1.0)]);
        assert!((total_turning(&two_corners) - FRAC_PI_2).abs() < 1e-12);
        let square_wave = pts(&[
            (0.0, 0.0),
            (1.0, 0.0),
            (1.0, 1.0),
            (2.0, 1.0),
            (2.0, 0.0),
            (3.0, 0.0),
        ]);
        assert!((total_turning(&square_wave) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn metrics_are_rigid_motion_invariant() {
        let path = pts(&[(0.0, 0.0), (3.0, 1.0), (5.0, -2.0), (9.0, 4.0)]);
        let angle: f64 = 0.73;
        let (s, c) = angle.sin_cos();
        let moved: Vec<Point2> = path
            .iter()
            .map(|p| Point2::new(c * p.x - s * p.y + 11.0, s * p.x + c * p.y - 7.0))
            .collect();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
        assert!(rel(path_length(&path), path_length(&moved)) < 1e-9);
        assert!(rel(total_turning(&path), total_turning(&moved)) < 1e-9);
    }

    #[test]
    fn evaluate_static_success_and_failure() {
        use crate::stig::{FailureReason, PlanStatus, PlannedPath};
        let path = PlannedPath {
            waypoints: pts(&[(0.0, 0.0), (10.0, 0.0)]),
            expansions: 1,
            status: PlanStatus::Success,
        };
        let rec = MetricsRecord::from_planned(&path, 0.002);
        assert_eq!(rec.path_length, Some(10.0));
        assert_eq!(rec.total_turning, Some(0.0));
        assert_eq!(rec.plan_time_s, 0.002);
        assert_eq!(rec.node_count, 2);
        assert_eq!(rec.status, "success");

        let failed = PlannedPath {
            waypoints: vec![],
            expansions: 3,
            status: PlanStatus::Failure(FailureReason::NoPath),
        };
        let rec = MetricsRecord::from_planned(&failed, 0.001);
        assert_eq!(rec.path_length, None);
        assert_eq!(rec.total_turning, None);
        assert_eq!(rec.status, "no_path");
    }

    #[test]
    fn evaluate_trace_accumulates_replan_time() {
        use crate::dtig::{ExecutionTrace, RunStatus, TraceEvent};
        // Two replans of 0.003 s and 0.004 s accumulate to 0.007 s.
        let trace = ExecutionTrace {
            steps: vec![TraceEvent::Move {
                position: Point2::new(0.0, 0.0),
            }],
            final_status: RunStatus::Reached,
            executed_path: pts(&[(0.0, 0.0), (5.0, 0.0)]),
            plan_time_s: 0.003 + 0.004,
        };
        let rec = MetricsRecord::from_trace(&trace);
        assert!((rec.plan_time_s - 0.007).abs() < 1e-12);
        assert_eq!(rec.path_length, Some(5.0));
        assert_eq!(rec.status, "reached");
    }

    #[test]
    fn csv_row_formats_na_for_failures() {
        let rec = MetricsRecord {
            path_length: None,
            total_turning: None,
            plan_time_s: 0.0025,
            node_count: 0,
            status: "no_path".to_string(),
        };
        assert_eq!(
            rec.csv_row("sparse-000", "stig", "sparse", 42),
            "sparse-000,stig,sparse,42,no_path,NA,NA,0.002500,0"
        );
    }
}
