//! Square-cell grid over a workspace: rasterized obstacle overlap, one-ring
//! obstacle inflation and Bresenham-based line of sight.
//!
//! A cell is blocked iff its closed square region intersects an active
//! obstacle. Inflation then marks the 8-neighborhood of every blocked cell,
//! which is what makes a positive Bresenham line-of-sight answer imply that
//! the continuous center-to-center segment misses every blocked square.

use crate::geometry::{polygon_intersects_rect, Point, Rect, Workspace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grid cell index. Ordering is lexicographic (x, then y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("resolution {res} is coarser than twice the agent radius {radius}")]
    ResolutionTooCoarse { res: f64, radius: f64 },
    #[error("resolution must be positive")]
    NonPositiveResolution,
    #[error("workspace bounds are degenerate")]
    EmptyWorkspace,
    #[error("cell {0} is outside the grid")]
    OutOfBounds(Cell),
}

/// Square-cell discretization of a workspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub res: f64,
    pub width: u32,
    pub height: u32,
    origin: Point,
    blocked: Vec<bool>,
    inflated: Vec<bool>,
}

/// Rasterizes the workspace at resolution `res`. A cell is blocked iff its
/// closed square intersects any active obstacle. The inflated layer starts
/// equal to the blocked layer; apply [`Grid::inflate`] before running
/// line-of-sight checks.
pub fn discretize(workspace: &Workspace, res: f64) -> Result<Grid, GridError> {
    if res <= 0.0 {
        return Err(GridError::NonPositiveResolution);
    }
    if let Some(r) = workspace.agent_radius() {
        if res < 2.0 * r {
            return Err(GridError::ResolutionTooCoarse { res, radius: r });
        }
    }
    let bounds = workspace.bounds;
    if bounds.is_degenerate() {
        return Err(GridError::EmptyWorkspace);
    }
    let width = (bounds.width() / res).ceil() as u32;
    let height = (bounds.height() / res).ceil() as u32;
    if width == 0 || height == 0 {
        return Err(GridError::EmptyWorkspace);
    }
    let mut grid = Grid {
        res,
        width,
        height,
        origin: Point::new(bounds.x_min, bounds.y_min),
        blocked: vec![false; (width * height) as usize],
        inflated: vec![false; (width * height) as usize],
    };
    for obs in workspace.active_obstacles() {
        // Restrict the per-cell test to the obstacle's bounding box.
        let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in &obs.vertices {
            lo_x = lo_x.min(v.x);
            hi_x = hi_x.max(v.x);
            lo_y = lo_y.min(v.y);
            hi_y = hi_y.max(v.y);
        }
        // Closed squares: a cell touching the bounding box at its far edge
        // still overlaps, hence the `- 1.0` before ceiling.
        let cx0 = ((((lo_x - bounds.x_min) / res - 1.0).ceil() as i64).clamp(0, width as i64 - 1)) as u32;
        let cx1 = ((((hi_x - bounds.x_min) / res).floor() as i64).clamp(0, width as i64 - 1)) as u32;
        let cy0 = ((((lo_y - bounds.y_min) / res - 1.0).ceil() as i64).clamp(0, height as i64 - 1)) as u32;
        let cy1 = ((((hi_y - bounds.y_min) / res).floor() as i64).clamp(0, height as i64 - 1)) as u32;
        for x in cx0..=cx1 {
            for y in cy0..=cy1 {
                let cell = Cell::new(x, y);
                if !grid.blocked[grid.index(cell)]
                    && polygon_intersects_rect(&obs.vertices, grid.cell_rect(cell))
                {
                    let i = grid.index(cell);
                    grid.blocked[i] = true;
                    grid.inflated[i] = true;
                }
            }
        }
    }
    Ok(grid)
}

impl Grid {
    fn index(&self, c: Cell) -> usize {
        (c.y * self.width + c.x) as usize
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    /// Workspace coordinates of the cell center.
    pub fn center(&self, c: Cell) -> Point {
        Point::new(
            self.origin.x + (c.x as f64 + 0.5) * self.res,
            self.origin.y + (c.y as f64 + 0.5) * self.res,
        )
    }

    /// Closed square region covered by the cell.
    pub fn cell_rect(&self, c: Cell) -> Rect {
        Rect::new(
            self.origin.x + c.x as f64 * self.res,
            self.origin.x + (c.x as f64 + 1.0) * self.res,
            self.origin.y + c.y as f64 * self.res,
            self.origin.y + (c.y as f64 + 1.0) * self.res,
        )
    }

    /// Cell containing the point, clamped to the grid.
    pub fn cell_of_point(&self, p: Point) -> Cell {
        let x = ((p.x - self.origin.x) / self.res).floor() as i64;
        let y = ((p.y - self.origin.y) / self.res).floor() as i64;
        Cell::new(
            x.clamp(0, self.width as i64 - 1) as u32,
            y.clamp(0, self.height as i64 - 1) as u32,
        )
    }

    /// True iff the cell square overlaps an obstacle (pre-inflation layer).
    pub fn is_blocked(&self, c: Cell) -> bool {
        self.blocked[self.index(c)]
    }

    /// True iff the cell is free in the inflated layer.
    pub fn is_traversable(&self, c: Cell) -> bool {
        !self.inflated[self.index(c)]
    }

    /// Marks the 8-neighborhood of every blocked cell as untraversable.
    /// The blocked layer itself is left untouched.
    pub fn inflate(mut self) -> Grid {
        let mut inflated = self.blocked.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.blocked[(y * self.width + x) as usize] {
                    for (nx, ny) in neighbors8(Cell::new(x, y), self.width, self.height) {
                        inflated[(ny * self.width + nx) as usize] = true;
                    }
                }
            }
        }
        self.inflated = inflated;
        self
    }

    /// In-bounds 8-neighbors of a cell.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        neighbors8(c, self.width, self.height).map(|(x, y)| Cell::new(x, y))
    }

    /// Discrete Bresenham line from `a` to `b`, both endpoints included.
    /// Endpoints are canonicalized before rasterizing, so the result for
    /// `(b, a)` is exactly the reverse of the result for `(a, b)`.
    pub fn line(&self, a: Cell, b: Cell) -> Result<Vec<Cell>, GridError> {
        for c in [a, b] {
            if !self.contains(c) {
                return Err(GridError::OutOfBounds(c));
            }
        }
        Ok(bresenham(a, b))
    }

    /// Line of sight: every Bresenham cell between `a` and `b` is traversable
    /// in the inflated layer.
    pub fn los(&self, a: Cell, b: Cell) -> Result<bool, GridError> {
        Ok(self.line(a, b)?.into_iter().all(|c| self.is_traversable(c)))
    }

    pub fn blocked_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(|c| self.is_blocked(*c))
    }

    /// Cells untraversable only because of inflation.
    pub fn inflated_only_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(|c| !self.is_traversable(*c) && !self.is_blocked(*c))
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let (w, h) = (self.width, self.height);
        (0..h).flat_map(move |y| (0..w).map(move |x| Cell::new(x, y)))
    }
}

fn neighbors8(c: Cell, width: u32, height: u32) -> impl Iterator<Item = (u32, u32)> {
    const OFFSETS: [(i64, i64); 8] = [
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, -1),
        (0, 1),
        (1, -1),
        (1, 0),
        (1, 1),
    ];
    OFFSETS.into_iter().filter_map(move |(dx, dy)| {
        let nx = c.x as i64 + dx;
        let ny = c.y as i64 + dy;
        if nx >= 0 && ny >= 0 && nx < width as i64 && ny < height as i64 {
            Some((nx as u32, ny as u32))
        } else {
            None
        }
    })
}

/// All-integer Bresenham rasterization. The minor-axis offset at step k is
/// round-half-up of `k * minor / major`, computed as
/// `(2 * minor * k + major) / (2 * major)` in integers.
fn bresenham(a: Cell, b: Cell) -> Vec<Cell> {
    let (lo, hi, swapped) = if a <= b { (a, b, false) } else { (b, a, true) };
    let x0 = lo.x as i64;
    let y0 = lo.y as i64;
    let dx = hi.x as i64 - x0;
    let dy = hi.y as i64 - y0;
    let (adx, ady) = (dx.abs(), dy.abs());
    let (sx, sy) = (dx.signum(), dy.signum());

    let steps = adx.max(ady);
    let mut cells = Vec::with_capacity(steps as usize + 1);
    if steps == 0 {
        cells.push(lo);
    } else if adx >= ady {
        for k in 0..=adx {
            let off = (2 * ady * k + adx) / (2 * adx);
            cells.push(Cell::new((x0 + sx * k) as u32, (y0 + sy * off) as u32));
        }
    } else {
        for k in 0..=ady {
            let off = (2 * adx * k + ady) / (2 * ady);
            cells.push(Cell::new((x0 + sx * off) as u32, (y0 + sy * k) as u32));
        }
    }
    if swapped {
        cells.reverse();
    }
    cells
}
