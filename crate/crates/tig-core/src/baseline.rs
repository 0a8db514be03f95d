//! Grid A* reference planner: the comparison oracle for path length and
//! feasibility.
//!
//! The scenario is rasterized onto a square grid (cell blocked when its
//! center is inside an inflated obstacle) and searched with 8-connected A*
//! under the octile heuristic, unit straight cost, `sqrt(2)` diagonal cost,
//! and no corner cutting. The returned path visits cell centers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use crate::geometry::Point2;
use crate::stig::{FailureReason, PlanStatus, PlannedPath};
use crate::world::Scenario;

/// Grid geometry; connectivity is fixed 8-neighbor.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    /// Meters per cell.
    pub resolution: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { resolution: 1.0 }
    }
}

/// Row-major occupancy grid over the scenario bounds.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    pub cols: usize,
    pub rows: usize,
    pub resolution: f64,
    blocked: Vec<bool>,
}

impl OccupancyGrid {
    #[inline]
    fn index(&self, col: usize, row: usize) -> usize {
        row * self.cols + col
    }

    #[inline]
    pub fn is_blocked(&self, col: usize, row: usize) -> bool {
        self.blocked[self.index(col, row)]
    }

    /// Center of a cell in world coordinates.
    #[inline]
    pub fn cell_center(&self, col: usize, row: usize) -> Point2 {
        Point2::new(
            (col as f64 + 0.5) * self.resolution,
            (row as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell containing a world point, clamped into the grid.
    pub fn cell_of(&self, p: Point2) -> (usize, usize) {
        let col = ((p.x / self.resolution).floor() as i64).clamp(0, self.cols as i64 - 1);
        let row = ((p.y / self.resolution).floor() as i64).clamp(0, self.rows as i64 - 1);
        (col as usize, row as usize)
    }
}

/// Rasterizes the scenario's known obstacles: a cell is blocked when its
/// center lies strictly inside an inflated ellipse.
pub fn rasterize(s: &Scenario, g: &GridSpec) -> OccupancyGrid {
    let cols = (s.width / g.resolution).ceil().max(1.0) as usize;
    let rows = (s.height / g.resolution).ceil().max(1.0) as usize;
    let mut grid = OccupancyGrid {
        cols,
        rows,
        resolution: g.resolution,
        blocked: vec![false; cols * rows],
    };
    for e in &s.obstacles {
        // Only cells under the inflated bounding box can be inside.
        let (sin_t, cos_t) = e.theta.sin_cos();
        let (a, b) = (e.semi_major(), e.semi_minor());
        let hw = ((a * cos_t).powi(2) + (b * sin_t).powi(2)).sqrt();
        let hh = ((a * sin_t).powi(2) + (b * cos_t).powi(2)).sqrt();
        let c0 = (((e.cx - hw) / g.resolution).floor().max(0.0)) as usize;
        let r0 = (((e.cy - hh) / g.resolution).floor().max(0.0)) as usize;
        let c1 = ((((e.cx + hw) / g.resolution).ceil()) as usize).min(cols.saturating_sub(1));
        let r1 = ((((e.cy + hh) / g.resolution).ceil()) as usize).min(rows.saturating_sub(1));
        for row in r0..=r1.min(rows - 1) {
            for col in c0..=c1 {
                let idx = grid.index(col, row);
                if !grid.blocked[idx] && e.value(grid.cell_center(col, row)) < 1.0 {
                    grid.blocked[idx] = true;
                }
            }
        }
    }
    grid
}

struct HeapEntry {
    f: f64,
    order: u64,
    cell: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.order.cmp(&self.order))
    }
}

const DIRECTIONS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Octile distance between cells, in meters.
#[inline]
fn octile(a: (usize, usize), b: (usize, usize), resolution: f64) -> f64 {
    let dx = (a.0 as f64 - b.0 as f64).abs();
    let dy = (a.1 as f64 - b.1 as f64).abs();
    resolution * (dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy))
}

/// Optimal grid path between the cells containing start and target.
///
/// Diagonal moves are forbidden when either orthogonally adjacent cell is
/// blocked, so returned paths are physically traversable.
pub fn grid_astar(s: &Scenario, spec: &GridSpec) -> PlannedPath {
    let grid = rasterize(s, spec);
    let start = grid.cell_of(s.start);
    let goal = grid.cell_of(s.target);
    if grid.is_blocked(start.0, start.1) || grid.is_blocked(goal.0, goal.1) {
        return PlannedPath {
            waypoints: Vec::new(),
            expansions: 0,
            status: PlanStatus::Failure(FailureReason::StartOrTargetBlocked),
        };
    }

    let n = grid.cols * grid.rows;
    let start_idx = grid.index(start.0, start.1);
    let goal_idx = grid.index(goal.0, goal.1);
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut order: u64 = 0;
    let mut expansions: u64 = 0;

    g[start_idx] = 0.0;
    heap.push(HeapEntry {
        f: octile(start, goal, grid.resolution),
        order,
        cell: start_idx,
    });

    while let Some(entry) = heap.pop() {
        let idx = entry.cell;
        if closed[idx] {
            continue;
        }
        if idx == goal_idx {
            return PlannedPath {
                waypoints: reconstruct(&grid, &parent, start_idx, goal_idx),
                expansions,
                status: PlanStatus::Success,
            };
        }
        closed[idx] = true;
        expansions += 1;
        let col = (idx % grid.cols) as i64;
        let row = (idx / grid.cols) as i64;
        for (dc, dr) in DIRECTIONS {
            let nc = col + dc;
            let nr = row + dr;
            if nc < 0 || nr < 0 || nc >= grid.cols as i64 || nr >= grid.rows as i64 {
                continue;
            }
            let (ncu, nru) = (nc as usize, nr as usize);
            if grid.is_blocked(ncu, nru) {
                continue;
            }
            let diagonal = dc != 0 && dr != 0;
            if diagonal
                && (grid.is_blocked(ncu, row as usize) || grid.is_blocked(col as usize, nru))
            {
                continue;
            }
            let step = if diagonal {
                SQRT_2 * grid.resolution
            } else {
                grid.resolution
            };
            let tentative = g[idx] + step;
            let nidx = grid.index(ncu, nru);
            if tentative < g[nidx] {
                g[nidx] = tentative;
                parent[nidx] = idx;
                order += 1;
                heap.push(HeapEntry {
                    f: tentative + octile((ncu, nru), goal, grid.resolution),
                    order,
                    cell: nidx,
                });
            }
        }
    }

    PlannedPath {
        waypoints: Vec::new(),
        expansions,
        status: PlanStatus::Failure(FailureReason::NoPath),
    }
}

fn reconstruct(
    grid: &OccupancyGrid,
    parent: &[usize],
    start_idx: usize,
    goal_idx: usize,
) -> Vec<Point2> {
    let mut cells = vec![goal_idx];
    let mut cursor = goal_idx;
    while cursor != start_idx {
        cursor = parent[cursor];
        cells.push(cursor);
    }
    cells.reverse();
    cells
        .into_iter()
        .map(|idx| grid.cell_center(idx % grid.cols, idx / grid.cols))
        .collect()
}
