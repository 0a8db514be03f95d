//! Static tangent-intersection planner.
//!
//! The search keeps a priority set of candidate waypoints and grows it by
//! the tangent expansion: aim at the target, and whenever the aimed segment
//! is blocked, draw the two tangent lines to the first collided obstacle
//! and convert their tangent points into waypoints on the obstacle's
//! virtual ellipse. Each candidate carries the waypoint-selection value
//! `D(n, w) + alpha * P + D(w, t)`; the set is ordered by that value offset
//! by the parent's accumulated cost, so cheap-looking local hops cannot
//! commit the search to long detours. Ties break FIFO and the extracted
//! path gets a line-of-sight shortcut pass, so plans are bit-deterministic
//! for a given scenario.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::geometry::{first_collided_obstacle, segment_clear, Ellipse, Point2};
use crate::world::{PlannerParams, Scenario};

/// Two positions within this distance are the same waypoint.
pub const POSITION_EPS: f64 = 1e-6;

/// A planned waypoint sequence from start to target.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    /// Start-first waypoints; empty on failure.
    pub waypoints: Vec<Point2>,
    /// Outer-loop node expansions performed.
    pub expansions: u64,
    pub status: PlanStatus,
}

impl PlannedPath {
    pub fn is_success(&self) -> bool {
        self.status == PlanStatus::Success
    }

    fn failure(reason: FailureReason, expansions: u64) -> Self {
        Self {
            waypoints: Vec::new(),
            expansions,
            status: PlanStatus::Failure(reason),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStatus {
    Success,
    Failure(FailureReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// Start or target strictly inside an inflated obstacle.
    StartOrTargetBlocked,
    /// Candidate set exhausted without reaching the target.
    NoPath,
    /// Expansion budget exceeded (overlapping-obstacle livelock guard).
    ExpansionLimit,
}

impl fmt::Display for PlanStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanStatus::Success => f.write_str("success"),
            PlanStatus::Failure(FailureReason::StartOrTargetBlocked) => {
                f.write_str("start_or_target_blocked")
            }
            PlanStatus::Failure(FailureReason::NoPath) => f.write_str("no_path"),
            PlanStatus::Failure(FailureReason::ExpansionLimit) => f.write_str("expansion_limit"),
        }
    }
}

/// Where a waypoint came from: the tangent point on an obstacle whose
/// virtual ellipse hosts it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointOrigin {
    pub obstacle: usize,
    pub tangent: Point2,
}

/// One search node; nodes live in the arena owned by [`SearchState`] and
/// refer to their parent by index.
#[derive(Debug, Clone)]
pub struct SearchNode {
    pub position: Point2,
    pub parent: Option<usize>,
    /// Waypoint-selection value at insertion time (one hop plus weighted
    /// blockage count plus straight-line remainder; see [`heuristic`]).
    pub h_value: f64,
    /// Accumulated cost from the start: hop lengths plus weighted blockage
    /// counts.
    pub g_value: f64,
    /// Ordering key: `g_value` of the parent plus `h_value`, i.e. accumulated
    /// cost plus straight-line remainder. Ordering by the local rule alone
    /// commits to myopic detours, so the total is what the candidate set is
    /// ranked by.
    pub f_value: f64,
    /// FIFO tie-break counter.
    pub insertion_order: u64,
    /// `None` for the start node and direct-target candidates.
    pub origin: Option<WaypointOrigin>,
}

/// A candidate waypoint produced by one expansion.
#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub position: Point2,
    pub origin: Option<WaypointOrigin>,
}

/// Outcome of one search run. Paths are start-first node-id chains into
/// [`SearchState::nodes`].
#[derive(Debug, Clone)]
pub enum SearchResult {
    /// Target reached.
    ReachedTarget(Vec<usize>),
    /// Candidate set exhausted.
    Exhausted,
    /// Expansion budget exceeded.
    OverBudget,
}

/// The waypoint selection rule: distance from the current node plus a
/// weighted count of obstacles blocking that approach plus the straight-line
/// distance to the target.
pub fn heuristic(n: Point2, w: Point2, t: Point2, obstacles: &[Ellipse], alpha_weight: f64) -> f64 {
    let blocked = obstacles
        .iter()
        .filter(|e| e.segment_collides(n, w))
        .count() as f64;
    n.distance_to(w) + alpha_weight * blocked + w.distance_to(t)
}

/// Start-first positions along the parent chain ending at `target_node`.
/// Fails on an index out of bounds or a cycle.
pub fn extract_path(nodes: &[SearchNode], target_node: usize) -> Result<Vec<Point2>, String> {
    let mut rev = Vec::new();
    let mut cursor = Some(target_node);
    while let Some(i) = cursor {
        let node = nodes
            .get(i)
            .ok_or_else(|| format!("node index {i} out of bounds"))?;
        rev.push(node.position);
        if rev.len() > nodes.len() {
            return Err("parent chain contains a cycle".to_string());
        }
        cursor = node.parent;
    }
    rev.reverse();
    Ok(rev)
}

#[derive(Debug)]
pub struct ExpansionOverflow;

struct OpenEntry {
    f: f64,
    order: u64,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenEntry {}
impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenEntry {
    // Reversed: BinaryHeap pops the max, we want minimum f, then FIFO.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.order.cmp(&self.order))
    }
}

type QuantKey = (i64, i64);

fn quantize(p: Point2) -> QuantKey {
    (
        (p.x / POSITION_EPS).round() as i64,
        (p.y / POSITION_EPS).round() as i64,
    )
}

/// Greedy line-of-sight pruning: from each kept waypoint, jump to the
/// farthest later waypoint whose direct segment is clear. Removes the
/// tangent-hop slack around obstacle boundaries without touching endpoints,
/// so pruned paths are never longer and keep every invariant of the source.
pub fn shortcut_path(points: &[Point2], obstacles: &[Ellipse]) -> Vec<Point2> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let mut out = vec![points[0]];
    let mut i = 0;
    while i + 1 < points.len() {
        let mut j = points.len() - 1;
        while j > i + 1 && !segment_clear(points[i], points[j], obstacles) {
            j -= 1;
        }
        out.push(points[j]);
        i = j;
    }
    out
}

/// Search bookkeeping: the candidate priority set, the visited set, and the
/// record of tangent points already turned into waypoints.
pub struct SearchState<'a> {
    obstacles: &'a [Ellipse],
    params: &'a PlannerParams,
    target: Point2,
    pub nodes: Vec<SearchNode>,
    open: BinaryHeap<OpenEntry>,
    open_by_pos: HashMap<QuantKey, usize>,
    closed: Vec<bool>,
    treated: HashSet<(usize, QuantKey)>,
    next_order: u64,
    pub expansions: u64,
}

impl<'a> SearchState<'a> {
    pub fn new(
        start: Point2,
        target: Point2,
        obstacles: &'a [Ellipse],
        params: &'a PlannerParams,
    ) -> Self {
        let mut state = Self {
            obstacles,
            params,
            target,
            nodes: Vec::new(),
            open: BinaryHeap::new(),
            open_by_pos: HashMap::new(),
            closed: Vec::new(),
            treated: HashSet::new(),
            next_order: 0,
            expansions: 0,
        };
        let h = heuristic(start, start, target, obstacles, params.alpha_weight);
        state.push_node(SearchNode {
            position: start,
            parent: None,
            h_value: h,
            g_value: 0.0,
            f_value: h,
            insertion_order: 0,
            origin: None,
        });
        state
    }

    /// Positions along a node-id chain.
    pub fn positions(&self, ids: &[usize]) -> Vec<Point2> {
        ids.iter().map(|&i| self.nodes[i].position).collect()
    }

    fn extract_ids(&self, target_node: usize) -> Option<Vec<usize>> {
        let mut rev = Vec::new();
        let mut cursor = Some(target_node);
        while let Some(i) = cursor {
            rev.push(i);
            if rev.len() > self.nodes.len() {
                return None;
            }
            cursor = self.nodes.get(i)?.parent;
        }
        rev.reverse();
        Some(rev)
    }

    fn push_node(&mut self, mut node: SearchNode) {
        node.insertion_order = self.next_order;
        self.next_order += 1;
        let id = self.nodes.len();
        self.open.push(OpenEntry {
            f: node.f_value,
            order: node.insertion_order,
            node: id,
        });
        self.open_by_pos.insert(quantize(node.position), id);
        self.nodes.push(node);
        self.closed.push(false);
    }

    /// Collects candidate waypoints for one node: aim at the target, and for
    /// each blocked aim push the first collided obstacle's two virtual-ellipse
    /// waypoints back onto the exploration queue. Accepted candidates must
    /// have a clear approach, satisfy the turning-angle bound against the
    /// node's incoming direction, and use a tangent point not already treated.
    pub fn collect_waypoints(
        &mut self,
        node_id: usize,
    ) -> Result<Vec<Candidate>, ExpansionOverflow> {
        let n_pos = self.nodes[node_id].position;
        let incoming = self.nodes[node_id].parent.map(|p| {
            let d = n_pos.sub(self.nodes[p].position);
            d.scale(1.0 / d.norm())
        });

        let mut to_explore: VecDeque<Candidate> = VecDeque::new();
        to_explore.push_back(Candidate {
            position: self.target,
            origin: None,
        });
        let mut explored: HashSet<QuantKey> = HashSet::new();
        let mut accepted = Vec::new();
        let mut processed: u64 = 0;

        while let Some(entry) = to_explore.pop_front() {
            if !explored.insert(quantize(entry.position)) {
                continue;
            }
            processed += 1;
            if processed > self.params.max_expansions {
                return Err(ExpansionOverflow);
            }

            if segment_clear(n_pos, entry.position, self.obstacles) {
                let out = entry.position.sub(n_pos);
                let angle_ok = match incoming {
                    Some(dir) if out.norm() > 0.0 => {
                        let turn = dir.cross(out).abs().atan2(dir.dot(out));
                        turn <= self.params.theta_max
                    }
                    _ => true,
                };
                let treated_ok = entry
                    .origin
                    .is_none_or(|o| !self.treated.contains(&(o.obstacle, quantize(o.tangent))));
                if angle_ok && treated_ok {
                    if let Some(o) = entry.origin {
                        self.treated.insert((o.obstacle, quantize(o.tangent)));
                    }
                    accepted.push(entry);
                }
                // A clear aim rejected for its angle or an already-treated
                // tangent point has no collided obstacle to expand.
            } else if let Some((k, _)) =
                first_collided_obstacle(n_pos, entry.position, self.obstacles)
            {
                let obstacle = &self.obstacles[k];
                if let Ok((t1, t2)) = obstacle.tangent_points_from(n_pos) {
                    for tangent in [t1, t2] {
                        if let Ok(w) = obstacle.virtual_waypoint(n_pos, tangent, self.params.d_vir)
                        {
                            to_explore.push_back(Candidate {
                                position: w,
                                origin: Some(WaypointOrigin {
                                    obstacle: k,
                                    tangent,
                                }),
                            });
                        }
                    }
                }
                // A node sitting exactly on this obstacle's boundary has no
                // tangent lines; its expansion is dropped.
            }
        }
        Ok(accepted)
    }

    fn insert_candidates(&mut self, parent: usize, candidates: Vec<Candidate>) {
        let n_pos = self.nodes[parent].position;
        let parent_g = self.nodes[parent].g_value;
        for cand in candidates {
            let h = heuristic(
                n_pos,
                cand.position,
                self.target,
                self.obstacles,
                self.params.alpha_weight,
            );
            let g = parent_g + h - cand.position.distance_to(self.target);
            let f = parent_g + h;
            let key = quantize(cand.position);
            if let Some(&existing) = self.open_by_pos.get(&key) {
                if !self.closed[existing] && f < self.nodes[existing].f_value {
                    let order = self.nodes[existing].insertion_order;
                    let node = &mut self.nodes[existing];
                    node.h_value = h;
                    node.g_value = g;
                    node.f_value = f;
                    node.parent = Some(parent);
                    node.origin = cand.origin;
                    self.open.push(OpenEntry {
                        f,
                        order,
                        node: existing,
                    });
                }
                continue;
            }
            let order = self.next_order;
            self.next_order = order + 1;
            let id = self.nodes.len();
            self.nodes.push(SearchNode {
                position: cand.position,
                parent: Some(parent),
                h_value: h,
                g_value: g,
                f_value: f,
                insertion_order: order,
                origin: cand.origin,
            });
            self.closed.push(false);
            self.open_by_pos.insert(key, id);
            self.open.push(OpenEntry { f, order, node: id });
        }
    }

    /// Runs the outer loop to completion.
    pub fn run(&mut self) -> SearchResult {
        while let Some(entry) = self.open.pop() {
            let id = entry.node;
            if self.closed[id] || entry.f != self.nodes[id].f_value {
                continue; // stale heap entry
            }
            let position = self.nodes[id].position;
            if position.distance_to(self.target) <= POSITION_EPS {
                return match self.extract_ids(id) {
                    Some(node_ids) => SearchResult::ReachedTarget(node_ids),
                    None => SearchResult::Exhausted,
                };
            }
            self.closed[id] = true;
            self.open_by_pos.remove(&quantize(position));
            self.expansions += 1;
            // Outer termination guard: candidate generation over a continuum
            // of tangent points is not finite by construction, so infeasible
            // maps must fail instead of hanging. Ten pops per allowed
            // collection entry leaves feasible dense maps plenty of room.
            if self.expansions > 10 * self.params.max_expansions {
                return SearchResult::OverBudget;
            }
            match self.collect_waypoints(id) {
                Ok(candidates) => self.insert_candidates(id, candidates),
                Err(ExpansionOverflow) => return SearchResult::OverBudget,
            }
        }
        SearchResult::Exhausted
    }
}

/// Plans between two free points over the given obstacles.
pub fn plan_between(
    start: Point2,
    target: Point2,
    obstacles: &[Ellipse],
    params: &PlannerParams,
) -> PlannedPath {
    for e in obstacles {
        if e.value(start) < 1.0 || e.value(target) < 1.0 {
            return PlannedPath::failure(FailureReason::StartOrTargetBlocked, 0);
        }
    }
    if start.distance_to(target) <= POSITION_EPS {
        return PlannedPath {
            waypoints: vec![start, target],
            expansions: 0,
            status: PlanStatus::Success,
        };
    }
    let mut search = SearchState::new(start, target, obstacles, params);
    let result = search.run();
    let expansions = search.expansions;
    match result {
        SearchResult::ReachedTarget(node_ids) => PlannedPath {
            waypoints: shortcut_path(&search.positions(&node_ids), obstacles),
            expansions,
            status: PlanStatus::Success,
        },
        SearchResult::Exhausted => PlannedPath::failure(FailureReason::NoPath, expansions),
        SearchResult::OverBudget => PlannedPath::failure(FailureReason::ExpansionLimit, expansions),
    }
}

/// Plans a static path for the scenario using its known obstacles only.
pub fn plan_static(s: &Scenario) -> PlannedPath {
    plan_between(s.start, s.target, &s.obstacles, &s.params)
}
