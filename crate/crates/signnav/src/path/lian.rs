//! LIAN: angle-constrained search over fixed-length path sections.
//!
//! Search states are `(cell, parent cell)` pairs because the admissible
//! continuations from a cell depend on the incoming heading. Successors lie
//! on the discrete ring of radius `step` around the current cell (cells whose
//! center distance rounds to `step`), must keep line of sight, and must turn
//! by at most `alpha_max` degrees relative to the incoming section. Goal
//! cells closer than the ring are admissible as final successors, so the last
//! section may be shorter.

use super::{heuristic, turn_angle, Path, PathError, QueueKey};
use crate::grid::{Cell, Grid};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

pub(crate) const ANGLE_EPS: f64 = 1e-9;

/// Integer offsets whose Euclidean length rounds to `step`, in lexicographic
/// order. For `step == 1` this is exactly the 8-neighborhood.
pub fn ring_offsets(step: u32) -> Vec<(i64, i64)> {
    let r = step as i64;
    let mut out = Vec::new();
    for dx in -(r + 1)..=(r + 1) {
        for dy in -(r + 1)..=(r + 1) {
            if dx == 0 && dy == 0 {
                continue;
            }
            let dist = ((dx * dx + dy * dy) as f64).sqrt();
            if dist >= step as f64 - 0.5 && dist < step as f64 + 0.5 {
                out.push((dx, dy));
            }
        }
    }
    out
}

type State = (Cell, Option<Cell>);

/// Searches for an angle-constrained path from `start` to any cell of
/// `goals`. The initial heading is unconstrained. Returns `Ok(None)` when no
/// path honors the constraint.
pub fn lian(
    grid: &Grid,
    start: Cell,
    goals: &BTreeSet<Cell>,
    alpha_max: f64,
    step: u32,
) -> Result<Option<Path>, PathError> {
    assert!(alpha_max > 0.0 && alpha_max <= 180.0, "alpha_max must lie in (0, 180]");
    assert!(step >= 1, "step must be at least 1");
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

    let offsets = ring_offsets(step);
    let mut g_score: BTreeMap<State, f64> = BTreeMap::new();
    let mut came_from: BTreeMap<State, State> = BTreeMap::new();
    let mut closed: BTreeSet<State> = BTreeSet::new();
    let mut open = BinaryHeap::new();

    let start_state: State = (start, None);
    g_score.insert(start_state, 0.0);
    open.push(QueueKey { f: heuristic(grid, start, goals), g: 0.0, cell: start, parent: None });

    while let Some(QueueKey { cell, parent, g, .. }) = open.pop() {
        let state: State = (cell, parent);
        if closed.contains(&state) {
            continue;
        }
        if g > g_score[&state] {
            continue;
        }
        closed.insert(state);
        if goals.contains(&cell) {
            return Ok(Some(reconstruct(grid, &came_from, state)));
        }
        for next in successors(grid, cell, goals, &offsets, step) {
            if let Some(prev) = parent {
                let turn = turn_angle(grid.center(prev), grid.center(cell), grid.center(next));
                if turn > alpha_max + ANGLE_EPS {
                    continue;
                }
            }
            if !grid.is_traversable(next) || !grid.los(cell, next).unwrap_or(false) {
                continue;
            }
            let next_state: State = (next, Some(cell));
            let cand_g = g + grid.center(cell).distance(grid.center(next));
            if cand_g < *g_score.get(&next_state).unwrap_or(&f64::INFINITY) {
                g_score.insert(next_state, cand_g);
                came_from.insert(next_state, state);
                open.push(QueueKey {
                    f: cand_g + heuristic(grid, next, goals),
                    g: cand_g,
                    cell: next,
                    parent: Some(cell),
                });
            }
        }
    }
    Ok(None)
}

/// Ring cells around `cell` plus any goal cell within ring reach, deduplicated
/// and in deterministic order.
fn successors(
    grid: &Grid,
    cell: Cell,
    goals: &BTreeSet<Cell>,
    offsets: &[(i64, i64)],
    step: u32,
) -> Vec<Cell> {
    let mut out: BTreeSet<Cell> = BTreeSet::new();
    let (cx, cy) = (cell.x as i64, cell.y as i64);
    for (dx, dy) in offsets {
        let (x, y) = (cx + dx, cy + dy);
        if x >= 0 && y >= 0 && (x as u32) < grid.width && (y as u32) < grid.height {
            out.insert(Cell::new(x as u32, y as u32));
        }
    }
    let reach = step as f64 + 0.5;
    let center = grid.center(cell);
    for goal in goals {
        if *goal != cell && center.distance(grid.center(*goal)) / grid.res <= reach {
            out.insert(*goal);
        }
    }
    out.into_iter().collect()
}

fn reconstruct(grid: &Grid, came_from: &BTreeMap<State, State>, last: State) -> Path {
    let mut cells = vec![last.0];
    let mut current = last;
    while let Some(prev) = came_from.get(&current) {
        cells.push(prev.0);
        current = *prev;
    }
    cells.reverse();
    Path::from_cells(grid, cells)
}
