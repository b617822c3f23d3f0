//! Continuous workspace model: rectangular bounds, polygonal obstacles and
//! circular agent bodies, plus the exact segment/polygon predicates the grid
//! layer and the test oracles are built on.
//!
//! All intersection predicates use the closed-set convention: touching a
//! boundary counts as overlap. This keeps discretization conservative and
//! makes the line-of-sight soundness argument hold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ObstacleId = u32;
pub type AgentId = u32;

/// A point in workspace coordinates (abstract length units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn is_degenerate(&self) -> bool {
        self.x_min >= self.x_max || self.y_min >= self.y_max
    }

    /// Closed containment: boundary points are inside.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x_min, self.y_min),
            Point::new(self.x_max, self.y_min),
            Point::new(self.x_max, self.y_max),
            Point::new(self.x_min, self.y_max),
        ]
    }

    pub fn edges(&self) -> [(Point, Point); 4] {
        let c = self.corners();
        [(c[0], c[1]), (c[1], c[2]), (c[2], c[3]), (c[3], c[0])]
    }
}

/// Polygonal obstacle with a declared type and a destroyed flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: ObstacleId,
    pub vertices: Vec<Point>,
    pub obstacle_type: String,
    pub destroyed: bool,
}

impl Obstacle {
    pub fn new(id: ObstacleId, vertices: Vec<Point>, obstacle_type: impl Into<String>) -> Self {
        Self { id, vertices, obstacle_type: obstacle_type.into(), destroyed: false }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len() as f64;
        let (sx, sy) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }
}

/// Circular agent body. All agents in a workspace share one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentBody {
    pub id: AgentId,
    pub position: Point,
    pub radius: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("workspace bounds are degenerate")]
    InvalidBounds,
    #[error("obstacle {0} has fewer than 3 vertices")]
    TooFewVertices(ObstacleId),
    #[error("obstacle {0} is not a simple polygon")]
    SelfIntersecting(ObstacleId),
    #[error("obstacle {0} has a vertex outside the workspace bounds")]
    VertexOutOfBounds(ObstacleId),
    #[error("duplicate obstacle id {0}")]
    DuplicateObstacle(ObstacleId),
    #[error("agent {0} has non-positive radius")]
    NonPositiveRadius(AgentId),
    #[error("agents do not share a single radius")]
    MixedRadii,
    #[error("duplicate agent id {0}")]
    DuplicateAgent(AgentId),
    #[error("unknown obstacle {0}")]
    UnknownObstacle(ObstacleId),
    #[error("obstacle {0} already destroyed")]
    AlreadyDestroyed(ObstacleId),
}

/// Rectangular 2D workspace with obstacles and agent bodies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub bounds: Rect,
    pub obstacles: Vec<Obstacle>,
    pub agents: Vec<AgentBody>,
}

impl Workspace {
    pub fn new(
        bounds: Rect,
        obstacles: Vec<Obstacle>,
        agents: Vec<AgentBody>,
    ) -> Result<Self, WorldError> {
        if bounds.is_degenerate() {
            return Err(WorldError::InvalidBounds);
        }
        let mut seen = std::collections::BTreeSet::new();
        for obs in &obstacles {
            if !seen.insert(obs.id) {
                return Err(WorldError::DuplicateObstacle(obs.id));
            }
            if obs.vertices.len() < 3 {
                return Err(WorldError::TooFewVertices(obs.id));
            }
            if !polygon_is_simple(&obs.vertices) {
                return Err(WorldError::SelfIntersecting(obs.id));
            }
            if obs.vertices.iter().any(|v| !bounds.contains(*v)) {
                return Err(WorldError::VertexOutOfBounds(obs.id));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for agent in &agents {
            if !seen.insert(agent.id) {
                return Err(WorldError::DuplicateAgent(agent.id));
            }
            if agent.radius <= 0.0 {
                return Err(WorldError::NonPositiveRadius(agent.id));
            }
        }
        if agents.windows(2).any(|w| w[0].radius != w[1].radius) {
            return Err(WorldError::MixedRadii);
        }
        Ok(Self { bounds, obstacles, agents })
    }

    pub fn obstacle(&self, id: ObstacleId) -> Option<&Obstacle> {
        self.obstacles.iter().find(|o| o.id == id)
    }

    /// Obstacles that still exist (not destroyed).
    pub fn active_obstacles(&self) -> impl Iterator<Item = &Obstacle> {
        self.obstacles.iter().filter(|o| !o.destroyed)
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentBody> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn agent_mut(&mut self, id: AgentId) -> Option<&mut AgentBody> {
        self.agents.iter_mut().find(|a| a.id == id)
    }

    /// Shared agent radius, if any agents exist.
    pub fn agent_radius(&self) -> Option<f64> {
        self.agents.first().map(|a| a.radius)
    }

    /// Flags an obstacle destroyed. Destroying twice is an error.
    pub fn destroy_obstacle(&mut self, id: ObstacleId) -> Result<(), WorldError> {
        let obs = self
            .obstacles
            .iter_mut()
            .find(|o| o.id == id)
            .ok_or(WorldError::UnknownObstacle(id))?;
        if obs.destroyed {
            return Err(WorldError::AlreadyDestroyed(id));
        }
        obs.destroyed = true;
        Ok(())
    }

    /// True iff the closed segment `p1..p2` touches no active obstacle.
    pub fn segment_clear(&self, p1: Point, p2: Point) -> bool {
        self.active_obstacles()
            .all(|obs| !segment_intersects_polygon(p1, p2, &obs.vertices))
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Collinear point-on-segment test (assumes `orient(a, b, p) == 0`).
fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-set segment intersection: shared endpoints and touches count.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Closed-set point-in-polygon: boundary points count as inside.
pub fn point_in_polygon(vertices: &[Point], p: Point) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if orient(a, b, p) == 0.0 && on_segment(a, b, p) {
            return true;
        }
    }
    // Even-odd ray crossing with the half-open vertex rule.
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// True iff the polygon has no repeated vertices, zero-length or collinear
/// overlapping edges, and no crossing between non-adjacent edges.
pub fn polygon_is_simple(vertices: &[Point]) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if vertices[i] == vertices[(i + 1) % n] {
            return false;
        }
    }
    for i in 0..n {
        let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
        for j in (i + 1)..n {
            let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Adjacent edges may only meet at their shared endpoint.
                let shared = if j == i + 1 { a2 } else { a1 };
                let (c, d) = if j == i + 1 { (a1, b2) } else { (a2, b1) };
                if orient(c, shared, d) == 0.0 && on_segment(c, d, shared) {
                    return false;
                }
            } else if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

/// Closed-set polygon/rectangle overlap.
pub fn polygon_intersects_rect(vertices: &[Point], rect: Rect) -> bool {
    if vertices.iter().any(|v| rect.contains(*v)) {
        return true;
    }
    if rect.corners().iter().any(|c| point_in_polygon(vertices, *c)) {
        return true;
    }
    let n = vertices.len();
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        for (r1, r2) in rect.edges() {
            if segments_intersect(a, b, r1, r2) {
                return true;
            }
        }
    }
    false
}

/// Closed-set segment/polygon overlap.
pub fn segment_intersects_polygon(p1: Point, p2: Point, vertices: &[Point]) -> bool {
    if point_in_polygon(vertices, p1) || point_in_polygon(vertices, p2) {
        return true;
    }
    let n = vertices.len();
    (0..n).any(|i| segments_intersect(p1, p2, vertices[i], vertices[(i + 1) % n]))
}

/// Closed-set segment/rectangle overlap.
pub fn segment_intersects_rect(p1: Point, p2: Point, rect: Rect) -> bool {
    if rect.contains(p1) || rect.contains(p2) {
        return true;
    }
    rect.edges()
        .iter()
        .any(|(r1, r2)| segments_intersect(p1, p2, *r1, *r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(id: ObstacleId, x: f64, y: f64, side: f64) -> Obstacle {
        Obstacle::new(
            id,
            vec![
                Point::new(x, y),
                Point::new(x + side, y),
                Point::new(x + side, y + side),
                Point::new(x, y + side),
            ],
            "ot_1",
        )
    }

    fn workspace_10(obstacles: Vec<Obstacle>) -> Workspace {
        Workspace::new(Rect::new(0.0, 10.0, 0.0, 10.0), obstacles, vec![]).unwrap()
    }

    #[test]
    fn rejects_degenerate_bounds() {
        let err = Workspace::new(Rect::new(3.0, 3.0, 0.0, 1.0), vec![], vec![]).unwrap_err();
        assert_eq!(err, WorldError::InvalidBounds);
    }

    #[test]
    fn rejects_self_intersecting_polygon() {
        let bowtie = Obstacle::new(
            1,
            vec![
                Point::new(1.0, 1.0),
                Point::new(3.0, 3.0),
                Point::new(1.0, 3.0),
                Point::new(3.0, 1.0),
            ],
            "ot_1",
        );
        let err = Workspace::new(Rect::new(0.0, 10.0, 0.0, 10.0), vec![bowtie], vec![]).unwrap_err();
        assert_eq!(err, WorldError::SelfIntersecting(1));
    }

    #[test]
    fn rejects_mixed_agent_radii() {
        let agents = vec![
            AgentBody { id: 1, position: Point::new(1.0, 1.0), radius: 0.5 },
            AgentBody { id: 2, position: Point::new(2.0, 2.0), radius: 0.4 },
        ];
        let err = Workspace::new(Rect::new(0.0, 10.0, 0.0, 10.0), vec![], agents).unwrap_err();
        assert_eq!(err, WorldError::MixedRadii);
    }

    #[test]
    fn segment_clear_in_empty_workspace() {
        let ws = workspace_10(vec![]);
        assert!(ws.segment_clear(Point::new(0.5, 0.5), Point::new(9.5, 9.5)));
    }

    #[test]
    fn segment_with_endpoint_inside_obstacle_not_clear() {
        let ws = workspace_10(vec![unit_square(1, 4.0, 4.0, 2.0)]);
        assert!(!ws.segment_clear(Point::new(5.0, 5.0), Point::new(9.0, 9.0)));
    }

    #[test]
    fn segment_tangent_to_polygon_vertex_not_clear() {
        // Horizontal segment grazing the square's top-left corner at (4, 6):
        // closed-set convention, so a single-point touch blocks.
        let ws = workspace_10(vec![unit_square(1, 4.0, 4.0, 2.0)]);
        assert!(!ws.segment_clear(Point::new(1.0, 6.0), Point::new(4.0, 6.0)));
        assert!(!ws.segment_clear(Point::new(1.0, 6.0), Point::new(9.0, 6.0)));
        // Just above the corner it is clear.
        assert!(ws.segment_clear(Point::new(1.0, 6.1), Point::new(9.0, 6.1)));
    }

    #[test]
    fn destroy_obstacle_flags_and_errors() {
        let mut ws = workspace_10(vec![unit_square(1, 4.0, 4.0, 2.0)]);
        assert!(!ws.segment_clear(Point::new(1.0, 5.0), Point::new(9.0, 5.0)));
        ws.destroy_obstacle(1).unwrap();
        assert!(ws.segment_clear(Point::new(1.0, 5.0), Point::new(9.0, 5.0)));
        assert_eq!(ws.destroy_obstacle(1).unwrap_err(), WorldError::AlreadyDestroyed(1));
        assert_eq!(ws.destroy_obstacle(7).unwrap_err(), WorldError::UnknownObstacle(7));
    }

    #[test]
    fn point_in_polygon_boundary_counts() {
        let square = unit_square(1, 2.0, 2.0, 2.0);
        assert!(point_in_polygon(&square.vertices, Point::new(3.0, 3.0)));
        assert!(point_in_polygon(&square.vertices, Point::new(2.0, 3.0)));
        assert!(point_in_polygon(&square.vertices, Point::new(2.0, 2.0)));
        assert!(!point_in_polygon(&square.vertices, Point::new(1.9, 3.0)));
    }

    #[test]
    fn point_in_concave_polygon() {
        // C-shape opening to the right.
        let c = vec![
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(4.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 3.0),
            Point::new(4.0, 3.0),
            Point::new(4.0, 4.0),
            Point::new(0.0, 4.0),
        ];
        assert!(polygon_is_simple(&c));
        assert!(point_in_polygon(&c, Point::new(0.5, 2.0)));
        assert!(!point_in_polygon(&c, Point::new(2.0, 2.0)));
    }

    #[test]
    fn rect_overlap_touch_counts() {
        let square = unit_square(1, 2.0, 2.0, 2.0);
        assert!(polygon_intersects_rect(&square.vertices, Rect::new(0.0, 2.0, 0.0, 2.0)));
        assert!(polygon_intersects_rect(&square.vertices, Rect::new(3.0, 3.5, 3.0, 3.5)));
        assert!(!polygon_intersects_rect(&square.vertices, Rect::new(0.0, 1.9, 0.0, 1.9)));
        // Rectangle strictly containing the polygon.
        assert!(polygon_intersects_rect(&square.vertices, Rect::new(0.0, 10.0, 0.0, 10.0)));
    }
}
