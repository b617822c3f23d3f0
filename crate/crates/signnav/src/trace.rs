//! Structured run traces: one JSON record per line, stable field order, so a
//! saved trace replays byte-for-byte.

use crate::coalition::Message;
use crate::geometry::{AgentId, Obstacle, ObstacleId, Point, Rect};
use crate::path::GoalArea;
use crate::sign::Situation;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Everything the renderer needs to draw a run, captured up front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunGeometry {
    pub bounds: Rect,
    pub res: f64,
    pub obstacles: Vec<Obstacle>,
    pub destroyable_types: BTreeSet<String>,
    pub agents: Vec<AgentGeometry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentGeometry {
    pub id: AgentId,
    pub radius: f64,
    pub start: Point,
    pub goal: GoalArea,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub sign: String,
    pub index: usize,
    pub label: String,
    pub coverage: usize,
}

/// Compact summary of a path-planning outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PathOutcome {
    Success { polyline: Vec<Point>, length: f64, max_turn: f64 },
    Blocked { obstacle_id: ObstacleId, obstacle_coords: Vec<Point> },
    AngleInfeasible { any_angle: Vec<Point> },
    GoalAreaInvalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    RunStart { scenario: String, geometry: RunGeometry },
    Iteration { iteration: u32 },
    SignificanceCandidates { candidates: Vec<Candidate> },
    RealizationSelected { sign: String, index: usize, label: String },
    AssistanceNeeded { sign: String, index: usize, label: String },
    ConditionsProjected { situation: Situation },
    ActionExecuted { sign: String, index: usize, label: String, expansion: Vec<String> },
    PathResult { place: String, result: PathOutcome },
    AlphaRelaxed { from: f64, to: f64 },
    Relocated { place: String, position: Point },
    MessageSent { message: Message },
    GoalAugmented { group: Vec<String> },
    ObstacleIncorporated { sign: String },
    Destruction { obstacle_id: ObstacleId },
    Arrival { position: Point },
    AgentWaiting,
    AgentFailed { reason: String },
    RunEnd { outcome: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub tick: u64,
    pub agent: Option<AgentId>,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Ordered event log for one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceLog {
    pub events: Vec<TraceEvent>,
}

impl TraceLog {
    pub fn record(&mut self, tick: u64, agent: Option<AgentId>, kind: EventKind) {
        debug_assert!(self.events.last().map_or(true, |e| e.tick <= tick));
        self.events.push(TraceEvent { tick, agent, kind });
    }

    /// One JSON object per line, in event order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<TraceLog, TraceError> {
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let event =
                serde_json::from_str(line).map_err(|source| TraceError::Parse { line: i + 1, source })?;
            events.push(event);
        }
        Ok(TraceLog { events })
    }

    pub fn geometry(&self) -> Option<&RunGeometry> {
        self.events.iter().find_map(|e| match &e.kind {
            EventKind::RunStart { geometry, .. } => Some(geometry),
            _ => None,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter()
    }
}
