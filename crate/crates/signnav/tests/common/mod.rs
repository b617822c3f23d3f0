//! Shared helpers and independent oracles for the integration tests.
//!
//! Everything here is deliberately written along different routes than the
//! library: point-in-polygon by winding angle plus boundary distance, grid
//! search by plain 8-connected A*, angle-constrained reachability by
//! breadth-first enumeration over (cell, incoming-cell) states.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use signnav::geometry::{Obstacle, Point, Rect, Workspace};
use signnav::grid::{discretize, Cell, Grid};
use signnav::path::{ring_offsets, turn_angle};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

pub fn scenario_path(name: &str) -> String {
    format!("{}/../../scenarios/{}", env!("CARGO_MANIFEST_DIR"), name)
}

pub fn load_scenario(name: &str) -> signnav::scenario::Scenario {
    let text = std::fs::read_to_string(scenario_path(name)).expect("scenario file readable");
    match signnav::scenario::parse_scenario(&text) {
        Ok(s) => s,
        Err(diags) => {
            for d in &diags {
                eprintln!("{d}");
            }
            panic!("scenario {name} failed to parse");
        }
    }
}

// ---------------------------------------------------------------------------
// Random workspace generation
// ---------------------------------------------------------------------------

/// Star-shaped polygon around a center: vertices sorted by angle are always a
/// simple polygon.
pub fn random_polygon(rng: &mut ChaCha8Rng, center: Point, max_radius: f64) -> Vec<Point> {
    let n = rng.gen_range(3..=7);
    let mut angles: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    while angles.len() < 3 {
        angles.push(angles.last().unwrap() + 0.7);
    }
    angles
        .iter()
        .map(|angle| {
            let r = rng.gen_range(0.3 * max_radius..max_radius);
            Point::new(center.x + r * angle.cos(), center.y + r * angle.sin())
        })
        .collect()
}

/// Random workspace with star polygons clamped inside the bounds.
pub fn random_workspace(rng: &mut ChaCha8Rng, side: f64, obstacle_count: usize) -> Workspace {
    let bounds = Rect::new(0.0, side, 0.0, side);
    let mut obstacles = Vec::new();
    for id in 0..obstacle_count {
        let center = Point::new(rng.gen_range(1.0..side - 1.0), rng.gen_range(1.0..side - 1.0));
        let verts: Vec<Point> = random_polygon(rng, center, rng.gen_range(0.8..2.2))
            .into_iter()
            .map(|p| Point::new(p.x.clamp(0.0, side), p.y.clamp(0.0, side)))
            .collect();
        if signnav::geometry::polygon_is_simple(&verts) {
            obstacles.push(Obstacle::new(id as u32 + 1, verts, "ot_1"));
        }
    }
    Workspace::new(bounds, obstacles, vec![]).expect("generated workspace is valid")
}

/// Random blocked/free grid built from unit-square obstacles, inflated.
pub fn random_grid(rng: &mut ChaCha8Rng, width: u32, height: u32, density: f64) -> Grid {
    let bounds = Rect::new(0.0, width as f64, 0.0, height as f64);
    let mut obstacles = Vec::new();
    let mut id = 1;
    for x in 0..width {
        for y in 0..height {
            if rng.gen_bool(density) {
                let (fx, fy) = (x as f64, y as f64);
                obstacles.push(Obstacle::new(
                    id,
                    vec![
                        Point::new(fx + 0.3, fy + 0.3),
                        Point::new(fx + 0.7, fy + 0.3),
                        Point::new(fx + 0.7, fy + 0.7),
                        Point::new(fx + 0.3, fy + 0.7),
                    ],
                    "ot_1",
                ));
                id += 1;
            }
        }
    }
    let ws = Workspace::new(bounds, obstacles, vec![]).unwrap();
    discretize(&ws, 1.0).unwrap().inflate()
}

/// Grid with given blocked cells (no inflation semantics: the blocked layer
/// itself is the traversability mask).
pub fn grid_from_mask(width: u32, height: u32, blocked: &[(u32, u32)]) -> Grid {
    let bounds = Rect::new(0.0, width as f64, 0.0, height as f64);
    let mut obstacles = Vec::new();
    for (i, (x, y)) in blocked.iter().enumerate() {
        let (fx, fy) = (*x as f64, *y as f64);
        obstacles.push(Obstacle::new(
            i as u32 + 1,
            vec![
                Point::new(fx + 0.3, fy + 0.3),
                Point::new(fx + 0.7, fy + 0.3),
                Point::new(fx + 0.7, fy + 0.7),
                Point::new(fx + 0.3, fy + 0.7),
            ],
            "ot_1",
        ));
    }
    let ws = Workspace::new(bounds, obstacles, vec![]).unwrap();
    discretize(&ws, 1.0).unwrap()
}

// ---------------------------------------------------------------------------
// Independent geometric oracles
// ---------------------------------------------------------------------------

fn seg_point_distance(a: Point, b: Point, p: Point) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * vx + (p.y - a.y) * vy) / len2).clamp(0.0, 1.0)
    };
    let proj = Point::new(a.x + t * vx, a.y + t * vy);
    proj.distance(p)
}

fn seg_seg_distance(a1: Point, a2: Point, b1: Point, b2: Point) -> f64 {
    // Proper crossing check via winding of signed areas.
    let d = |p: Point, q: Point, r: Point| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let (d1, d2) = (d(b1, b2, a1), d(b1, b2, a2));
    let (d3, d4) = (d(a1, a2, b1), d(a1, a2, b2));
    if ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) && d1 != 0.0 && d2 != 0.0 {
        return 0.0;
    }
    [
        seg_point_distance(a1, a2, b1),
        seg_point_distance(a1, a2, b2),
        seg_point_distance(b1, b2, a1),
        seg_point_distance(b1, b2, a2),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

/// Winding-number point-in-polygon with an explicit boundary-distance check.
pub fn oracle_point_in_polygon(verts: &[Point], p: Point) -> bool {
    let n = verts.len();
    for i in 0..n {
        if seg_point_distance(verts[i], verts[(i + 1) % n], p) < 1e-12 {
            return true;
        }
    }
    let mut winding = 0.0f64;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let ang1 = (a.y - p.y).atan2(a.x - p.x);
        let ang2 = (b.y - p.y).atan2(b.x - p.x);
        let mut delta = ang2 - ang1;
        while delta > std::f64::consts::PI {
            delta -= std::f64::consts::TAU;
        }
        while delta < -std::f64::consts::PI {
            delta += std::f64::consts::TAU;
        }
        winding += delta;
    }
    winding.abs() > std::f64::consts::PI
}

/// Closed-set polygon/rectangle overlap by boundary distance + containment.
pub fn oracle_polygon_intersects_rect(verts: &[Point], rect: Rect) -> bool {
    let corners = [
        Point::new(rect.x_min, rect.y_min),
        Point::new(rect.x_max, rect.y_min),
        Point::new(rect.x_max, rect.y_max),
        Point::new(rect.x_min, rect.y_max),
    ];
    if corners.iter().any(|c| oracle_point_in_polygon(verts, *c)) {
        return true;
    }
    if verts
        .iter()
        .any(|v| v.x >= rect.x_min && v.x <= rect.x_max && v.y >= rect.y_min && v.y <= rect.y_max)
    {
        return true;
    }
    let rect_edges = [
        (corners[0], corners[1]),
        (corners[1], corners[2]),
        (corners[2], corners[3]),
        (corners[3], corners[0]),
    ];
    let n = verts.len();
    for i in 0..n {
        let (a, b) = (verts[i], verts[(i + 1) % n]);
        for (r1, r2) in rect_edges {
            if seg_seg_distance(a, b, r1, r2) < 1e-12 {
                return true;
            }
        }
    }
    false
}

/// Closed-set segment/rectangle overlap by distance.
pub fn oracle_segment_intersects_rect(p1: Point, p2: Point, rect: Rect) -> bool {
    let inside = |p: Point| {
        p.x >= rect.x_min && p.x <= rect.x_max && p.y >= rect.y_min && p.y <= rect.y_max
    };
    if inside(p1) || inside(p2) {
        return true;
    }
    let corners = [
        Point::new(rect.x_min, rect.y_min),
        Point::new(rect.x_max, rect.y_min),
        Point::new(rect.x_max, rect.y_max),
        Point::new(rect.x_min, rect.y_max),
    ];
    let edges = [
        (corners[0], corners[1]),
        (corners[1], corners[2]),
        (corners[2], corners[3]),
        (corners[3], corners[0]),
    ];
    edges
        .into_iter()
        .any(|(a, b)| seg_seg_distance(p1, p2, a, b) < 1e-12)
}

/// Exact segment clearance against every active obstacle, by distance.
pub fn oracle_segment_clear(ws: &Workspace, p1: Point, p2: Point) -> bool {
    for obs in ws.active_obstacles() {
        if oracle_point_in_polygon(&obs.vertices, p1) || oracle_point_in_polygon(&obs.vertices, p2)
        {
            return false;
        }
        let n = obs.vertices.len();
        for i in 0..n {
            let (a, b) = (obs.vertices[i], obs.vertices[(i + 1) % n]);
            if seg_seg_distance(p1, p2, a, b) < 1e-12 {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Search oracles
// ---------------------------------------------------------------------------

#[derive(PartialEq)]
struct OracleNode {
    f: f64,
    g: f64,
    cell: Cell,
}

impl Eq for OracleNode {}
impl Ord for OracleNode {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .f
            .partial_cmp(&self.f)
            .unwrap()
            .then_with(|| other.cell.cmp(&self.cell))
    }
}
impl PartialOrd for OracleNode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Plain 8-connected A* with unit/diagonal costs. Returns the shortest grid
/// path length to any goal, or None when unreachable.
pub fn astar_oracle(grid: &Grid, start: Cell, goals: &BTreeSet<Cell>) -> Option<f64> {
    if !grid.is_traversable(start) {
        return None;
    }
    let h = |c: Cell| -> f64 {
        goals
            .iter()
            .map(|g| grid.center(c).distance(grid.center(*g)))
            .fold(f64::INFINITY, f64::min)
    };
    let mut dist: BTreeMap<Cell, f64> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(start, 0.0);
    heap.push(OracleNode { f: h(start), g: 0.0, cell: start });
    while let Some(OracleNode { cell, g, .. }) = heap.pop() {
        if g > dist[&cell] {
            continue;
        }
        if goals.contains(&cell) {
            return Some(g);
        }
        for next in grid.neighbors(cell) {
            if !grid.is_traversable(next) {
                continue;
            }
            let step = grid.center(cell).distance(grid.center(next));
            let cand = g + step;
            if cand < *dist.get(&next).unwrap_or(&f64::INFINITY) {
                dist.insert(next, cand);
                heap.push(OracleNode { f: cand + h(next), g: cand, cell: next });
            }
        }
    }
    None
}

/// Breadth-first enumeration of angle-constrained paths over
/// (cell, incoming predecessor) states using the same ring successor rule as
/// the implementation. Returns true iff some goal cell is reachable.
pub fn lian_reachability_oracle(
    grid: &Grid,
    start: Cell,
    goals: &BTreeSet<Cell>,
    alpha_max: f64,
    step: u32,
) -> bool {
    if !grid.is_traversable(start) {
        return false;
    }
    if goals.contains(&start) {
        return true;
    }
    let offsets = ring_offsets(step);
    let mut seen: BTreeSet<(Cell, Option<Cell>)> = BTreeSet::new();
    let mut queue: VecDeque<(Cell, Option<Cell>)> = VecDeque::new();
    seen.insert((start, None));
    queue.push_back((start, None));
    while let Some((cell, parent)) = queue.pop_front() {
        if goals.contains(&cell) {
            return true;
        }
        let mut successors: BTreeSet<Cell> = BTreeSet::new();
        for (dx, dy) in &offsets {
            let (x, y) = (cell.x as i64 + dx, cell.y as i64 + dy);
            if x >= 0 && y >= 0 && (x as u32) < grid.width && (y as u32) < grid.height {
                successors.insert(Cell::new(x as u32, y as u32));
            }
        }
        for goal in goals {
            if *goal != cell
                && grid.center(cell).distance(grid.center(*goal)) / grid.res
                    <= step as f64 + 0.5
            {
                successors.insert(*goal);
            }
        }
        for next in successors {
            if !grid.is_traversable(next) || !grid.los(cell, next).unwrap_or(false) {
                continue;
            }
            if let Some(prev) = parent {
                let turn =
                    turn_angle(grid.center(prev), grid.center(cell), grid.center(next));
                if turn > alpha_max + 1e-9 {
                    continue;
                }
            }
            let state = (next, Some(cell));
            if seen.insert(state) {
                queue.push_back(state);
            }
        }
    }
    false
}

/// 8-connected flood fill over the inflated traversability layer.
pub fn reachable_cells(grid: &Grid, start: Cell) -> BTreeSet<Cell> {
    let mut seen = BTreeSet::new();
    if !grid.is_traversable(start) {
        return seen;
    }
    let mut queue = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    while let Some(cell) = queue.pop_front() {
        for next in grid.neighbors(cell) {
            if grid.is_traversable(next) && seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen
}
