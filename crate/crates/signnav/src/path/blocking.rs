//! Identifies which obstacle to blame when no any-angle path exists.
//!
//! The traversable region reachable from the start is flood-filled on the
//! pre-inflation layer (inflation halos would otherwise hide the obstacle
//! cells from the frontier). Blocked cells adjacent to that region are mapped
//! back to the obstacles overlapping them, and each candidate obstacle is
//! scored by the cheapest way past it: the minimum over its adjacent
//! reachable cells of `g(cell) + straight-line distance to the nearest goal
//! cell`. The lowest-scoring obstacle wins; ties go to the smallest id.

use super::{PathError, QueueKey};
use crate::geometry::{polygon_intersects_rect, ObstacleId, Point, Workspace};
use crate::grid::{Cell, Grid};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

pub fn identify_blocking_obstacle(
    grid: &Grid,
    workspace: &Workspace,
    start: Cell,
    goals: &BTreeSet<Cell>,
) -> Result<(ObstacleId, Vec<Point>), PathError> {
    if !grid.contains(start) {
        return Err(PathError::StartOutOfBounds(start));
    }
    if grid.is_blocked(start) {
        return Err(PathError::StartBlocked(start));
    }

    // Dijkstra over the pre-inflation free region: reachable set plus exact
    // travel cost g for every reachable cell.
    let mut g_score: BTreeMap<Cell, f64> = BTreeMap::new();
    let mut open = BinaryHeap::new();
    g_score.insert(start, 0.0);
    open.push(QueueKey { f: 0.0, g: 0.0, cell: start, parent: None });
    while let Some(QueueKey { cell, g, .. }) = open.pop() {
        if g > g_score[&cell] {
            continue;
        }
        for next in grid.neighbors(cell) {
            if grid.is_blocked(next) {
                continue;
            }
            let cand = g + grid.center(cell).distance(grid.center(next));
            if cand < *g_score.get(&next).unwrap_or(&f64::INFINITY) {
                g_score.insert(next, cand);
                open.push(QueueKey { f: cand, g: cand, cell: next, parent: None });
            }
        }
    }

    // Frontier: blocked cells touching the reachable region, with the best
    // goal-ward score among their reachable neighbors.
    let goal_points: Vec<Point> = goals.iter().map(|c| grid.center(*c)).collect();
    let mut frontier: BTreeMap<Cell, f64> = BTreeMap::new();
    for (cell, g) in &g_score {
        let p = grid.center(*cell);
        let to_goal = goal_points
            .iter()
            .map(|gp| p.distance(*gp))
            .fold(f64::INFINITY, f64::min);
        let score = g + to_goal;
        for next in grid.neighbors(*cell) {
            if grid.is_blocked(next) {
                let entry = frontier.entry(next).or_insert(f64::INFINITY);
                *entry = entry.min(score);
            }
        }
    }
    if frontier.is_empty() {
        return Err(PathError::NoCandidate);
    }

    // Map frontier cells to the active obstacles overlapping them.
    let mut best: Option<(f64, ObstacleId)> = None;
    for obs in workspace.active_obstacles() {
        let score = frontier
            .iter()
            .filter(|(cell, _)| polygon_intersects_rect(&obs.vertices, grid.cell_rect(**cell)))
            .map(|(_, s)| *s)
            .fold(f64::INFINITY, f64::min);
        if score.is_finite() {
            let better = match best {
                None => true,
                Some((bs, bid)) => score < bs || (score == bs && obs.id < bid),
            };
            if better {
                best = Some((score, obs.id));
            }
        }
    }
    match best {
        Some((_, id)) => {
            let coords = workspace.obstacle(id).map(|o| o.vertices.clone()).unwrap_or_default();
            Ok((id, coords))
        }
        None => Err(PathError::NoCandidate),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Obstacle, Rect};
    use crate::grid::discretize;

    fn rect_obstacle(id: u32, x0: f64, y0: f64, x1: f64, y1: f64) -> Obstacle {
        Obstacle::new(
            id,
            vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
            ],
            "ot_1",
        )
    }

    #[test]
    fn single_wall_is_the_candidate() {
        let ws = Workspace::new(
            Rect::new(0.0, 12.0, 0.0, 12.0),
            vec![rect_obstacle(7, 5.2, 0.0, 5.8, 12.0)],
            vec![],
        )
        .unwrap();
        let grid = discretize(&ws, 1.0).unwrap().inflate();
        let goals: BTreeSet<Cell> = [Cell::new(10, 6)].into_iter().collect();
        let (id, coords) =
            identify_blocking_obstacle(&grid, &ws, Cell::new(1, 6), &goals).unwrap();
        assert_eq!(id, 7);
        assert_eq!(coords, ws.obstacle(7).unwrap().vertices);
    }

    #[test]
    fn nearer_wall_wins_when_it_hides_the_farther_one() {
        // Two parallel full-height walls; only the nearer borders the region
        // reachable from the start.
        let ws = Workspace::new(
            Rect::new(0.0, 16.0, 0.0, 8.0),
            vec![
                rect_obstacle(2, 9.2, 0.0, 9.8, 8.0),
                rect_obstacle(1, 5.2, 0.0, 5.8, 8.0),
            ],
            vec![],
        )
        .unwrap();
        let grid = discretize(&ws, 1.0).unwrap().inflate();
        let goals: BTreeSet<Cell> = [Cell::new(14, 4)].into_iter().collect();
        let (id, _) = identify_blocking_obstacle(&grid, &ws, Cell::new(1, 4), &goals).unwrap();
        assert_eq!(id, 1);
    }

    #[test]
    fn no_candidate_when_region_borders_only_grid_edge() {
        let ws = Workspace::new(Rect::new(0.0, 8.0, 0.0, 8.0), vec![], vec![]).unwrap();
        let grid = discretize(&ws, 1.0).unwrap().inflate();
        let goals: BTreeSet<Cell> = [Cell::new(7, 7)].into_iter().collect();
        let err = identify_blocking_obstacle(&grid, &ws, Cell::new(1, 1), &goals).unwrap_err();
        assert_eq!(err, PathError::NoCandidate);
    }
}
