//! Dynamic planners over a circular-range sensor.
//!
//! Two modes: partially known maps, where a static plan is repaired whenever
//! a newly sensed obstacle blocks the remaining path, and fully unknown maps,
//! where the planner repeatedly searches the sensed sub-environment toward
//! the target, committing range-clamped waypoints on the sensor perimeter and
//! gathering obstacle information while moving.
//!
//! Motion is node-granular: the vehicle hops from waypoint to waypoint (at
//! most one sensor range per hop), sensing at every arrival. Obstacles
//! overlapping a committed in-range subpath are always visible before the
//! subpath is planned, because the whole subpath lies inside the sensor disc.
//! A run owns all of its mutable state, so runs over shared scenarios may
//! execute in parallel.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::time::Instant;

use crate::geometry::{clamp_to_range, Ellipse, Point2};
use crate::stig::POSITION_EPS;
use crate::world::Scenario;

/// Hard cap on executed moves per run.
pub const MAX_MOVES: usize = 10_000;
/// Distance tolerance of the boundary-sampling visibility test, meters.
pub const SENSE_TOL: f64 = 1e-3;
/// Boundary samples per obstacle in the visibility test.
const SENSE_SAMPLES: usize = 1024;
/// Grid used to detect position revisits, meters.
const LOOP_QUANTUM: f64 = 1e-3;
/// Arrivals at one quantized position beyond which the run fails.
const MAX_ARRIVALS: usize = 4;

/// Circular-range sensor: an obstacle is visible when the minimum distance
/// from the vehicle to its inflated boundary is within range.
#[derive(Debug, Clone, Copy)]
pub struct SensorModel {
    pub range: f64,
}

impl SensorModel {
    /// Boundary-sampling visibility with cheap distance bounds: for an
    /// outside point at center distance `d` the nearest boundary point lies
    /// between `d - A` and `d - B`, so sampling only runs in the ambiguous
    /// band.
    pub fn visible(&self, e: &Ellipse, pos: Point2) -> bool {
        let d = pos.distance_to(e.center());
        if d - e.semi_major() > self.range + SENSE_TOL {
            return false;
        }
        if e.value(pos) >= 1.0 && d - e.semi_minor() <= self.range {
            return true;
        }
        let mut min_sq = f64::INFINITY;
        for i in 0..SENSE_SAMPLES {
            let phi = 2.0 * std::f64::consts::PI * (i as f64) / (SENSE_SAMPLES as f64);
            min_sq = min_sq.min(e.boundary_point(phi).sub(pos).norm_sq());
        }
        min_sq.sqrt() <= self.range + SENSE_TOL
    }
}

/// Ids (into the combined visible + hidden obstacle list) now inside sensor
/// range. Cumulative visibility across a run is the run's bookkeeping.
pub fn sense(obstacles: &[Ellipse], pos: Point2, range: f64) -> Vec<usize> {
    let sensor = SensorModel { range };
    obstacles
        .iter()
        .enumerate()
        .filter(|(_, e)| sensor.visible(e, pos))
        .map(|(i, _)| i)
        .collect()
}

/// Point on the segment `pos -> aim` at distance exactly `r` from `pos`;
/// the waypoint committed when the aim lies beyond sensor range.
pub fn max_range_waypoint(pos: Point2, aim: Point2, r: f64) -> Point2 {
    let d = aim.sub(pos);
    pos.add(d.scale(r / d.norm()))
}

/// One recorded step of a dynamic run.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    /// Arrival at a position.
    Move { position: Point2 },
    /// Newly visible obstacle ids after sensing at a position.
    Sense { position: Point2, seen: Vec<usize> },
    /// A fresh plan committed at a position; the path starts there.
    Replan { position: Point2, path: Vec<Point2> },
    /// A waypoint clamped to the sensor perimeter, with its original aim.
    MaxRangeWaypoint { position: Point2, aim: Point2 },
}

impl TraceEvent {
    pub fn position(&self) -> Point2 {
        match self {
            TraceEvent::Move { position }
            | TraceEvent::Sense { position, .. }
            | TraceEvent::Replan { position, .. }
            | TraceEvent::MaxRangeWaypoint { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Reached,
    Failed(RunFailure),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunFailure {
    /// The offline plan over the initially known obstacles failed.
    NoInitialPath,
    /// A mid-run plan failed at this position.
    ReplanFailed { x: f64, y: f64 },
    /// Move budget exhausted.
    StepLimit,
    /// The vehicle revisited a position too often.
    LoopDetected,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Reached => f.write_str("reached"),
            RunStatus::Failed(RunFailure::NoInitialPath) => f.write_str("no_initial_path"),
            RunStatus::Failed(RunFailure::ReplanFailed { .. }) => f.write_str("replan_failed"),
            RunStatus::Failed(RunFailure::StepLimit) => f.write_str("step_limit"),
            RunStatus::Failed(RunFailure::LoopDetected) => f.write_str("loop_detected"),
        }
    }
}

/// Timestamped log of one dynamic run.
#[derive(Debug, Clone)]
pub struct ExecutionTrace {
    pub steps: Vec<TraceEvent>,
    pub final_status: RunStatus,
    /// Positions actually traversed, starting at the scenario start.
    pub executed_path: Vec<Point2>,
    /// Cumulative wall-clock seconds spent in planner invocations.
    pub plan_time_s: f64,
}

impl ExecutionTrace {
    pub fn reached(&self) -> bool {
        self.final_status == RunStatus::Reached
    }

    /// Number of committed plans (the unknown mode counts every episode).
    pub fn replan_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|e| matches!(e, TraceEvent::Replan { .. }))
            .count()
    }

    /// One JSON object per event, one event per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let p = step.position();
            let (kind, payload) = match step {
                TraceEvent::Move { .. } => ("move", serde_json::Value::Null),
                TraceEvent::Sense { seen, .. } => ("sense", serde_json::json!({ "seen": seen })),
                TraceEvent::Replan { path, .. } => (
                    "replan",
                    serde_json::json!({
                        "path": path.iter().map(|w| [w.x, w.y]).collect::<Vec<_>>()
                    }),
                ),
                TraceEvent::MaxRangeWaypoint { aim, .. } => (
                    "max_range_waypoint",
                    serde_json::json!({ "aim": [aim.x, aim.y] }),
                ),
            };
            let line = serde_json::json!({ "kind": kind, "x": p.x, "y": p.y, "payload": payload });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the JSON-lines event form back into events.
    pub fn events_from_jsonl(text: &str) -> Result<Vec<TraceEvent>, String> {
        let mut events = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let v: serde_json::Value =
                serde_json::from_str(line).map_err(|e| format!("line {lineno}: {e}"))?;
            let position = Point2::new(
                v["x"].as_f64().ok_or(format!("line {lineno}: missing x"))?,
                v["y"].as_f64().ok_or(format!("line {lineno}: missing y"))?,
            );
            let event = match v["kind"].as_str().unwrap_or_default() {
                "move" => TraceEvent::Move { position },
                "sense" => TraceEvent::Sense {
                    position,
                    seen: v["payload"]["seen"]
                        .as_array()
                        .map(|a| {
                            a.iter()
                                .filter_map(|x| x.as_u64().map(|u| u as usize))
                                .collect()
                        })
                        .unwrap_or_default(),
                },
                "replan" => TraceEvent::Replan {
                    position,
                    path: parse_point_list(&v["payload"]["path"]),
                },
                "max_range_waypoint" => TraceEvent::MaxRangeWaypoint {
                    position,
                    aim: parse_point(&v["payload"]["aim"]).unwrap_or(position),
                },
                other => return Err(format!("line {lineno}: unknown event kind '{other}'")),
            };
            events.push(event);
        }
        Ok(events)
    }
}

fn parse_point(v: &serde_json::Value) -> Option<Point2> {
    let a = v.as_array()?;
    Some(Point2::new(a.first()?.as_f64()?, a.get(1)?.as_f64()?))
}

fn parse_point_list(v: &serde_json::Value) -> Vec<Point2> {
    v.as_array()
        .map(|items| items.iter().filter_map(parse_point).collect())
        .unwrap_or_default()
}

/// Shared run bookkeeping for both dynamic planners.
struct Run<'a> {
    scenario: &'a Scenario,
    all_obstacles: Vec<Ellipse>,
    seen: Vec<bool>,
    /// Newly sensed ids not yet checked against the remaining plan.
    pending: Vec<usize>,
    steps: Vec<TraceEvent>,
    executed: Vec<Point2>,
    pos: Point2,
    moves: usize,
    plan_time_s: f64,
    arrivals: HashMap<(i64, i64), usize>,
}

enum StepOutcome {
    Arrived,
    ReachedTarget,
    Stopped(RunFailure),
}

impl<'a> Run<'a> {
    fn new(scenario: &'a Scenario, initially_known: usize) -> Self {
        let all_obstacles = scenario.all_obstacles();
        let seen = (0..all_obstacles.len())
            .map(|i| i < initially_known)
            .collect();
        let mut run = Self {
            scenario,
            all_obstacles,
            seen,
            pending: Vec::new(),
            steps: vec![TraceEvent::Move {
                position: scenario.start,
            }],
            executed: vec![scenario.start],
            pos: scenario.start,
            moves: 0,
            plan_time_s: 0.0,
            arrivals: HashMap::new(),
        };
        run.record_arrival(scenario.start);
        run
    }

    fn range(&self) -> f64 {
        self.scenario.params.sensor_range
    }

    fn visible_obstacles(&self) -> Vec<Ellipse> {
        self.all_obstacles
            .iter()
            .zip(&self.seen)
            .filter(|(_, &s)| s)
            .map(|(e, _)| *e)
            .collect()
    }

    /// True when the position has now been visited too many times.
    fn record_arrival(&mut self, p: Point2) -> bool {
        let key = (
            (p.x / LOOP_QUANTUM).round() as i64,
            (p.y / LOOP_QUANTUM).round() as i64,
        );
        let count = self.arrivals.entry(key).or_insert(0);
        *count += 1;
        *count > MAX_ARRIVALS
    }

    /// Marks newly visible obstacles, queues them for plan re-checking and
    /// records a sense event when the set grew. Visibility is cumulative.
    fn sense_here(&mut self) {
        let newly: Vec<usize> = sense(&self.all_obstacles, self.pos, self.range())
            .into_iter()
            .filter(|&i| !self.seen[i])
            .collect();
        if newly.is_empty() {
            return;
        }
        for &i in &newly {
            self.seen[i] = true;
        }
        self.steps.push(TraceEvent::Sense {
            position: self.pos,
            seen: newly.clone(),
        });
        self.pending.extend(newly);
    }

    /// One hop: arrive, check budgets and the target, sense.
    fn single_step(&mut self, to: Point2) -> StepOutcome {
        self.pos = to;
        self.executed.push(to);
        self.steps.push(TraceEvent::Move { position: to });
        self.moves += 1;
        if self.moves > MAX_MOVES {
            return StepOutcome::Stopped(RunFailure::StepLimit);
        }
        if self.pos.distance_to(self.scenario.target) <= POSITION_EPS {
            return StepOutcome::ReachedTarget;
        }
        if self.record_arrival(to) {
            return StepOutcome::Stopped(RunFailure::LoopDetected);
        }
        self.sense_here();
        StepOutcome::Arrived
    }

    /// Moves to `next`, inserting sensor-perimeter interpolation points for
    /// hops longer than the range. Every committed in-range subpath lies
    /// inside the sensor disc it was planned in, so no re-checking happens
    /// here; the caller decides what sensing updates mean.
    fn move_to(&mut self, next: Point2) -> StepOutcome {
        loop {
            let step = if self.pos.distance_to(next) > self.range() {
                match clamp_to_range(self.pos, self.range(), self.pos, next) {
                    Ok(p) => {
                        self.steps.push(TraceEvent::MaxRangeWaypoint {
                            position: p,
                            aim: next,
                        });
                        p
                    }
                    Err(_) => next,
                }
            } else {
                next
            };
            match self.single_step(step) {
                StepOutcome::Arrived if step != next => continue,
                outcome => return outcome,
            }
        }
    }

    fn take_pending(&mut self) -> Vec<usize> {
        std::mem::take(&mut self.pending)
    }

    fn finish(self, final_status: RunStatus) -> ExecutionTrace {
        ExecutionTrace {
            steps: self.steps,
            final_status,
            executed_path: self.executed,
            plan_time_s: self.plan_time_s,
        }
    }

    fn replan_failure(&self) -> RunStatus {
        RunStatus::Failed(RunFailure::ReplanFailed {
            x: self.pos.x,
            y: self.pos.y,
        })
    }
}

fn blocks_remaining(run: &Run, newly: &[usize], queue: &VecDeque<Point2>) -> bool {
    if newly.is_empty() || queue.is_empty() {
        return false;
    }
    let mut from = run.pos;
    for &to in queue {
        for &id in newly {
            if run.all_obstacles[id].segment_collides(from, to) {
                return true;
            }
        }
        from = to;
    }
    false
}

/// Replans from the current position over everything visible; commits the
/// fresh path into the queue on success.
fn replan(run: &mut Run, queue: &mut VecDeque<Point2>) -> bool {
    let visible = run.visible_obstacles();
    let started = Instant::now();
    let fresh =
        crate::stig::plan_between(run.pos, run.scenario.target, &visible, &run.scenario.params);
    run.plan_time_s += started.elapsed().as_secs_f64();
    if !fresh.is_success() {
        return false;
    }
    run.steps.push(TraceEvent::Replan {
        position: run.pos,
        path: fresh.waypoints.clone(),
    });
    *queue = fresh.waypoints[1..].iter().copied().collect();
    true
}

/// Partially known environment: plan offline over the known obstacles, walk
/// the plan one hop at a time, and replan from the current position whenever
/// a newly sensed obstacle blocks a remaining segment.
pub fn plan_dynamic_partial(s: &Scenario) -> ExecutionTrace {
    let mut run = Run::new(s, s.obstacles.len());

    let started = Instant::now();
    let initial = crate::stig::plan_between(s.start, s.target, &s.obstacles, &s.params);
    run.plan_time_s += started.elapsed().as_secs_f64();
    if !initial.is_success() {
        return run.finish(RunStatus::Failed(RunFailure::NoInitialPath));
    }
    let mut queue: VecDeque<Point2> = initial.waypoints[1..].iter().copied().collect();

    // The sensor is live from the start: obstacles already in range can
    // invalidate the offline plan before the first move.
    run.sense_here();
    loop {
        let pending = run.take_pending();
        if blocks_remaining(&run, &pending, &queue) && !replan(&mut run, &mut queue) {
            let status = run.replan_failure();
            return run.finish(status);
        }

        let Some(&next) = queue.front() else {
            // Plans always end at the target, whose arrival returns below.
            let status = run.replan_failure();
            return run.finish(status);
        };
        let step = if run.pos.distance_to(next) > run.range() {
            match clamp_to_range(run.pos, run.range(), run.pos, next) {
                Ok(p) => {
                    run.steps.push(TraceEvent::MaxRangeWaypoint {
                        position: p,
                        aim: next,
                    });
                    p
                }
                Err(_) => {
                    queue.pop_front();
                    next
                }
            }
        } else {
            queue.pop_front();
            next
        };
        match run.single_step(step) {
            StepOutcome::ReachedTarget => return run.finish(RunStatus::Reached),
            StepOutcome::Stopped(failure) => return run.finish(RunStatus::Failed(failure)),
            StepOutcome::Arrived => {}
        }
    }
}

/// Fully unknown environment: only the endpoints and bounds are known up
/// front, so every obstacle (the scenario's visible list included) must be
/// sensed. Each episode plans over everything seen so far (unsensed space is
/// assumed free), commits the in-range prefix of that plan -- clamping the
/// first out-of-range aim to the sensor perimeter as the maximum-range
/// waypoint -- and walks it while sensing, until the target is reached.
pub fn plan_dynamic_unknown(s: &Scenario) -> ExecutionTrace {
    let mut run = Run::new(s, 0);
    run.sense_here();

    loop {
        if run.pos.distance_to(s.target) <= POSITION_EPS {
            return run.finish(RunStatus::Reached);
        }
        run.take_pending(); // every episode replans over everything seen
        let visible = run.visible_obstacles();
        let started = Instant::now();
        let plan = crate::stig::plan_between(run.pos, s.target, &visible, &s.params);
        run.plan_time_s += started.elapsed().as_secs_f64();
        if !plan.is_success() {
            let status = run.replan_failure();
            return run.finish(status);
        }
        run.steps.push(TraceEvent::Replan {
            position: run.pos,
            path: plan.waypoints.clone(),
        });

        // Commit the in-range prefix; the first aim beyond the perimeter is
        // replaced by the intersection of its (clear) approach segment with
        // the perimeter.
        let origin = run.pos;
        let range = run.range();
        let mut prefix: Vec<Point2> = vec![origin];
        for &w in &plan.waypoints[1..] {
            if w.distance_to(origin) <= range {
                prefix.push(w);
                continue;
            }
            let from = *prefix.last().expect("prefix starts at the origin");
            if let Ok(perimeter) = clamp_to_range(origin, range, from, w) {
                run.steps.push(TraceEvent::MaxRangeWaypoint {
                    position: perimeter,
                    aim: w,
                });
                prefix.push(perimeter);
            }
            break;
        }
        for &w in &prefix[1..] {
            match run.move_to(w) {
                StepOutcome::ReachedTarget => return run.finish(RunStatus::Reached),
                StepOutcome::Stopped(failure) => return run.finish(RunStatus::Failed(failure)),
                StepOutcome::Arrived => {}
            }
        }
    }
}

/// Runs a dynamic plan in the requested mode.
pub fn plan_dynamic(s: &Scenario, unknown: bool) -> ExecutionTrace {
    if unknown {
        plan_dynamic_unknown(s)
    } else {
        plan_dynamic_partial(s)
    }
}
