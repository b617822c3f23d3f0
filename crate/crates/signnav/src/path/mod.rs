//! Grid path planning: any-angle search (Theta*), angle-constrained search
//! (LIAN), goal-area resolution and blocking-obstacle identification, wired
//! together by the two-phase [`plan`] pipeline.

mod blocking;
mod lian;
mod theta;

pub use blocking::identify_blocking_obstacle;
pub use lian::{lian, ring_offsets};
pub use theta::theta_star;

use crate::geometry::{ObstacleId, Point, Workspace};
use crate::grid::{Cell, Grid};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Fuzzy goal area: any point within `r_g` of `cp` completes a relocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalArea {
    pub cp: Point,
    pub r_g: f64,
}

/// A path as a sequence of traversable, not necessarily adjacent cells.
/// Consecutive cells are connected by straight center-to-center segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub cells: Vec<Cell>,
    pub length: f64,
    pub max_turn: f64,
}

impl Path {
    pub fn from_cells(grid: &Grid, cells: Vec<Cell>) -> Path {
        let points: Vec<Point> = cells.iter().map(|c| grid.center(*c)).collect();
        let length = points.windows(2).map(|w| w[0].distance(w[1])).sum();
        let max_turn = path_max_turn(&points);
        Path { cells, length, max_turn }
    }

    /// Center-to-center polyline in workspace coordinates.
    pub fn polyline(&self, grid: &Grid) -> Vec<Point> {
        self.cells.iter().map(|c| grid.center(*c)).collect()
    }
}

/// Maximum turn angle over the interior vertices of a polyline, in degrees.
/// Polylines with fewer than three points have no turns.
pub fn path_max_turn(points: &[Point]) -> f64 {
    let mut max_turn: f64 = 0.0;
    for w in points.windows(3) {
        max_turn = max_turn.max(turn_angle(w[0], w[1], w[2]));
    }
    max_turn
}

/// Turn angle at `b` between segments `a->b` and `b->c`, in degrees.
/// 0 means straight ahead, 180 a full reversal.
pub fn turn_angle(a: Point, b: Point, c: Point) -> f64 {
    let (ux, uy) = (b.x - a.x, b.y - a.y);
    let (vx, vy) = (c.x - b.x, c.y - b.y);
    if (ux == 0.0 && uy == 0.0) || (vx == 0.0 && vy == 0.0) {
        return 0.0;
    }
    let cross = ux * vy - uy * vx;
    let dot = ux * vx + uy * vy;
    cross.abs().atan2(dot).to_degrees()
}

/// Outcome of the two-phase planning pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanResult {
    /// Angle-constrained path found.
    Success(Path),
    /// An any-angle path exists but no path satisfies the turn constraint.
    AngleInfeasible { any_angle_path: Path },
    /// No any-angle path exists; carries the identified blocking obstacle.
    Blocked { obstacle_id: ObstacleId, obstacle_coords: Vec<Point> },
    /// The goal area contains no traversable cell at all.
    GoalAreaInvalid,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("start cell {0} is not traversable")]
    StartBlocked(Cell),
    #[error("start cell {0} is outside the grid")]
    StartOutOfBounds(Cell),
    #[error("reachable region borders no obstacle")]
    NoCandidate,
}

/// Traversable cells serving the goal area.
///
/// First every traversable cell whose center lies within `r_g` of `cp` is
/// collected. If none qualifies, rings of cells are examined outward from the
/// cell containing `cp` (Chebyshev rings, so ring 1 is the 8-neighborhood)
/// and the first ring containing traversable cells wins. An empty result
/// means the whole grid is untraversable.
pub fn resolve_goal_area(grid: &Grid, goal: &GoalArea) -> BTreeSet<Cell> {
    let mut cells: BTreeSet<Cell> = grid
        .cells()
        .filter(|c| grid.is_traversable(*c) && grid.center(*c).distance(goal.cp) <= goal.r_g)
        .collect();
    if !cells.is_empty() {
        return cells;
    }
    let anchor = grid.cell_of_point(goal.cp);
    if grid.is_traversable(anchor) {
        cells.insert(anchor);
        return cells;
    }
    let max_ring = grid.width.max(grid.height);
    for ring in 1..=max_ring {
        let found: BTreeSet<Cell> = ring_cells(grid, anchor, ring)
            .into_iter()
            .filter(|c| grid.is_traversable(*c))
            .collect();
        if !found.is_empty() {
            return found;
        }
    }
    BTreeSet::new()
}

fn ring_cells(grid: &Grid, anchor: Cell, ring: u32) -> Vec<Cell> {
    let r = ring as i64;
    let (ax, ay) = (anchor.x as i64, anchor.y as i64);
    let mut out = Vec::new();
    for dx in -r..=r {
        for dy in -r..=r {
            if dx.abs().max(dy.abs()) != r {
                continue;
            }
            let (x, y) = (ax + dx, ay + dy);
            if x >= 0 && y >= 0 && (x as u32) < grid.width && (y as u32) < grid.height {
                out.push(Cell::new(x as u32, y as u32));
            }
        }
    }
    out
}

/// Two-phase planning: resolve the goal area, search for an any-angle path,
/// then for an angle-constrained path.
///
/// An empty goal area yields [`PlanResult::GoalAreaInvalid`]. A failed
/// any-angle search yields [`PlanResult::Blocked`] with the identified
/// obstacle. A failed angle-constrained search yields
/// [`PlanResult::AngleInfeasible`] carrying the any-angle path.
pub fn plan(
    grid: &Grid,
    workspace: &Workspace,
    start: Cell,
    goal: &GoalArea,
    alpha_max: f64,
    step: u32,
) -> Result<PlanResult, PathError> {
    let goals = resolve_goal_area(grid, goal);
    if goals.is_empty() {
        return Ok(PlanResult::GoalAreaInvalid);
    }
    let any_angle = match theta_star(grid, start, &goals)? {
        Some(path) => path,
        None => {
            let (obstacle_id, obstacle_coords) =
                identify_blocking_obstacle(grid, workspace, start, &goals)?;
            return Ok(PlanResult::Blocked { obstacle_id, obstacle_coords });
        }
    };
    match lian(grid, start, &goals, alpha_max, step)? {
        Some(path) => Ok(PlanResult::Success(path)),
        None => Ok(PlanResult::AngleInfeasible { any_angle_path: any_angle }),
    }
}

/// Shared open-list ordering: min f, then max g, then lexicographic cell
/// order (and parent order for search states that carry one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct QueueKey {
    pub f: f64,
    pub g: f64,
    pub cell: Cell,
    pub parent: Option<Cell>,
}

impl Eq for QueueKey {}

impl Ord for QueueKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // BinaryHeap is a max-heap; invert so pop yields the best key.
        other
            .f
            .partial_cmp(&self.f)
            .unwrap()
            .then(self.g.partial_cmp(&other.g).unwrap())
            .then_with(|| other.cell.cmp(&self.cell))
            .then_with(|| other.parent.cmp(&self.parent))
    }
}

impl PartialOrd for QueueKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn heuristic(grid: &Grid, c: Cell, goals: &BTreeSet<Cell>) -> f64 {
    let p = grid.center(c);
    goals
        .iter()
        .map(|g| p.distance(grid.center(*g)))
        .fold(f64::INFINITY, f64::min)
}
