//! Basic Theta*: any-angle search on an 8-connected grid.
//!
//! The expansion relaxes each neighbor through the current vertex's parent
//! whenever line of sight holds (path 2), falling back to the plain grid edge
//! otherwise (path 1). Because the path-2 cost never exceeds the path-1 cost,
//! the returned path is never longer than the shortest 8-connected grid path.

use super::{heuristic, Path, PathError, QueueKey};
use crate::grid::{Cell, Grid};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

/// Searches for an any-angle path from `start` to any cell of `goals`.
/// Returns `Ok(None)` when no goal is 8-connected-reachable.
pub fn theta_star(
    grid: &Grid,
    start: Cell,
    goals: &BTreeSet<Cell>,
) -> Result<Option<Path>, PathError> {
    if !grid.contains(start) {
        return Err(PathError::StartOutOfBounds(start));
    }
    if !grid.is_traversable(start) {
        return Err(PathError::StartBlocked(start));
    }
    if goals.is_empty() {
        return Ok(None);
    }
    if goals.contains(&start) {
        return Ok(Some(Path::from_cells(grid, vec![start])));
    }

    let mut g_score: BTreeMap<Cell, f64> = BTreeMap::new();
    let mut parent: BTreeMap<Cell, Cell> = BTreeMap::new();
    let mut closed: BTreeSet<Cell> = BTreeSet::new();
    let mut open = BinaryHeap::new();

    g_score.insert(start, 0.0);
    parent.insert(start, start);
    open.push(QueueKey { f: heuristic(grid, start, goals), g: 0.0, cell: start, parent: None });

    while let Some(QueueKey { cell, g, .. }) = open.pop() {
        if closed.contains(&cell) {
            continue;
        }
        if g > g_score[&cell] {
            continue; // stale queue entry
        }
        closed.insert(cell);
        if goals.contains(&cell) {
            return Ok(Some(reconstruct(grid, &parent, start, cell)));
        }
        let anchor = parent[&cell];
        for next in grid.neighbors(cell) {
            if closed.contains(&next) || !grid.is_traversable(next) {
                continue;
            }
            // Path 2 through the parent when visible, else the grid edge.
            let (cand_parent, cand_g) = if grid.los(anchor, next).unwrap_or(false) {
                (anchor, g_score[&anchor] + grid.center(anchor).distance(grid.center(next)))
            } else {
                (cell, g + grid.center(cell).distance(grid.center(next)))
            };
            if cand_g < *g_score.get(&next).unwrap_or(&f64::INFINITY) {
                g_score.insert(next, cand_g);
                parent.insert(next, cand_parent);
                open.push(QueueKey {
                    f: cand_g + heuristic(grid, next, goals),
                    g: cand_g,
                    cell: next,
                    parent: None,
                });
            }
        }
    }
    Ok(None)
}

fn reconstruct(grid: &Grid, parent: &BTreeMap<Cell, Cell>, start: Cell, goal: Cell) -> Path {
    let mut cells = vec![goal];
    let mut current = goal;
    while current != start {
        current = parent[&current];
        cells.push(current);
    }
    cells.reverse();
    Path::from_cells(grid, cells)
}
