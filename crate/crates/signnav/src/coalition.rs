//! Multi-agent runtime: shared world state, FIFO message bus and a
//! deterministic round-robin scheduler assembling the joint plan.
//!
//! Agents take turns in fixed id order. A turn delivers any pending messages
//! and then runs one full behavior-planner invocation. World mutations
//! (obstacle destruction) are observed by every other mind right after the
//! turn that caused them, so a destruction always lands before the blocked
//! agent replans. The run ends when every body sits inside its goal area,
//! when no agent can make progress, or at the tick cap.

use crate::behavior::{
    run_behavior, AgentMind, BehaviorPlan, FailureReason, InvocationOutcome, PlanStatus,
};
use crate::geometry::{AgentId, ObstacleId, Point, Workspace, WorldError};
use crate::grid::{discretize, Grid, GridError};
use crate::sign::CausalRelation;
use crate::trace::{AgentGeometry, EventKind, RunGeometry, TraceLog};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Communicable description of a causal relation: label plus condition and
/// effect groups as sign names. Personal content never crosses the wire;
/// building the description keeps only sign links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationDescription {
    pub label: String,
    pub conditions: Vec<Vec<String>>,
    pub effects: Vec<Vec<String>>,
}

impl RelationDescription {
    pub fn from_relation(relation: &CausalRelation) -> Self {
        let names = |groups: &[crate::sign::FeatureGroup]| {
            groups
                .iter()
                .map(|g| {
                    g.iter()
                        .filter_map(|f| f.sign_name().map(str::to_owned))
                        .collect::<Vec<String>>()
                })
                .filter(|g| !g.is_empty())
                .collect::<Vec<_>>()
        };
        RelationDescription {
            label: relation.label.clone(),
            conditions: names(&relation.conditions),
            effects: names(&relation.effects),
        }
    }

    pub fn sign_names(&self) -> impl Iterator<Item = &str> {
        self.conditions
            .iter()
            .chain(self.effects.iter())
            .flatten()
            .map(String::as_str)
    }
}

/// Inter-agent goal-delegation message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub sender: AgentId,
    pub recipient: AgentId,
    pub payload: RelationDescription,
    pub obstacle_sign: Option<String>,
    pub obstacle_coords: Option<Vec<Point>>,
    pub required_action: String,
    pub sender_goal_facts: Vec<Vec<String>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoalitionError {
    #[error("unknown recipient agent {0}")]
    UnknownRecipient(AgentId),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// FIFO message queue; a message is delivered at the recipient's next turn.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MessageBus {
    agents: BTreeSet<AgentId>,
    queue: VecDeque<Message>,
}

impl MessageBus {
    pub fn new(agents: impl IntoIterator<Item = AgentId>) -> Self {
        Self { agents: agents.into_iter().collect(), queue: VecDeque::new() }
    }

    pub fn send(&mut self, message: Message) -> Result<(), CoalitionError> {
        if !self.agents.contains(&message.recipient) {
            return Err(CoalitionError::UnknownRecipient(message.recipient));
        }
        self.queue.push_back(message);
        Ok(())
    }

    /// Removes and returns the pending messages for one recipient, in send
    /// order.
    pub fn drain_for(&mut self, recipient: AgentId) -> Vec<Message> {
        let mut delivered = Vec::new();
        let mut rest = VecDeque::with_capacity(self.queue.len());
        for message in self.queue.drain(..) {
            if message.recipient == recipient {
                delivered.push(message);
            } else {
                rest.push_back(message);
            }
        }
        self.queue = rest;
        delivered
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }
}

/// Which agents can destroy which obstacle types.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CapabilityMatrix {
    pub destroyable_by: BTreeMap<String, Vec<AgentId>>,
}

impl CapabilityMatrix {
    /// Agents able to destroy the given type, in ascending id order.
    pub fn capable_agents(&self, obstacle_type: &str) -> Option<Vec<AgentId>> {
        self.destroyable_by.get(obstacle_type).map(|agents| {
            let mut sorted = agents.clone();
            sorted.sort_unstable();
            sorted
        })
    }

    pub fn is_destroyable(&self, obstacle_type: &str) -> bool {
        self.destroyable_by
            .get(obstacle_type)
            .map(|a| !a.is_empty())
            .unwrap_or(false)
    }
}

/// Shared world: the workspace plus the grid derived from it at a fixed
/// resolution. Destroying an obstacle rebuilds the grid so every later query
/// sees the updated traversability.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub workspace: Workspace,
    pub grid: Grid,
    res: f64,
    pending_destructions: Vec<ObstacleId>,
}

impl WorldState {
    pub fn new(workspace: Workspace, res: f64) -> Result<Self, GridError> {
        let grid = discretize(&workspace, res)?.inflate();
        Ok(Self { workspace, grid, res, pending_destructions: Vec::new() })
    }

    pub fn res(&self) -> f64 {
        self.res
    }

    pub fn destroy(&mut self, id: ObstacleId) -> Result<(), CoalitionError> {
        self.workspace.destroy_obstacle(id)?;
        self.grid = discretize(&self.workspace, self.res)?.inflate();
        self.pending_destructions.push(id);
        Ok(())
    }

    /// Destructions not yet observed by the other minds.
    pub fn take_pending_destructions(&mut self) -> Vec<ObstacleId> {
        std::mem::take(&mut self.pending_destructions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AgentState {
    Active,
    AwaitingAssistance,
    Satisfied,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RunOutcome {
    /// Every agent's body ended inside its goal area.
    Success,
    /// No agent could make progress; carries each agent's terminal state.
    Failure { failures: Vec<(AgentId, String)> },
    TickCapExceeded,
}

/// Result of a coalition run: outcome, full trace, per-agent plans and the
/// ordered message log.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionRun {
    pub outcome: RunOutcome,
    pub trace: TraceLog,
    pub plans: Vec<(AgentId, BehaviorPlan)>,
    pub messages: Vec<Message>,
    pub final_world: Workspace,
}

/// Deterministic multi-agent execution.
pub struct Coalition {
    pub world: WorldState,
    pub minds: Vec<AgentMind>,
    pub capabilities: CapabilityMatrix,
    pub tick_cap: u64,
    pub scenario_name: String,
}

impl Coalition {
    pub fn run(mut self) -> CoalitionRun {
        let mut trace = TraceLog::default();
        let mut bus = MessageBus::new(self.minds.iter().map(|m| m.agent_id));
        let mut states: Vec<AgentState> = self
            .minds
            .iter()
            .map(|m| {
                if m.goal_satisfied() && m.body_in_goal_area() {
                    AgentState::Satisfied
                } else {
                    AgentState::Active
                }
            })
            .collect();
        trace.record(
            0,
            None,
            EventKind::RunStart {
                scenario: self.scenario_name.clone(),
                geometry: run_geometry(&self.world, &self.capabilities, &self.minds),
            },
        );

        let mut tick = 0u64;
        let mut messages = Vec::new();
        let outcome = loop {
            if self.all_arrived() {
                break RunOutcome::Success;
            }
            if tick >= self.tick_cap {
                break RunOutcome::TickCapExceeded;
            }
            let idx = (tick % self.minds.len() as u64) as usize;
            tick += 1;

            // Deliver pending messages first: a delivery wakes the agent.
            let delivered = bus.drain_for(self.minds[idx].agent_id);
            for message in delivered {
                messages.push(message.clone());
                match self.minds[idx].on_message(&message) {
                    Ok(group) if !group.is_empty() => {
                        trace.record(
                            tick,
                            Some(self.minds[idx].agent_id),
                            EventKind::GoalAugmented { group },
                        );
                    }
                    _ => {}
                }
                if states[idx] != AgentState::Failed {
                    states[idx] = AgentState::Active;
                }
            }

            if states[idx] != AgentState::Active {
                // Nothing to do this turn; check for a stalemate.
                if bus.is_empty() && states.iter().all(|s| *s != AgentState::Active) {
                    break self.stalemate_outcome(&states);
                }
                continue;
            }

            let mind = &mut self.minds[idx];
            let outcome =
                run_behavior(mind, &mut self.world, &mut bus, &self.capabilities, &mut trace, tick);
            states[idx] = match outcome {
                InvocationOutcome::Satisfied => AgentState::Satisfied,
                InvocationOutcome::AwaitingAssistance => AgentState::AwaitingAssistance,
                InvocationOutcome::Failed(_) => AgentState::Failed,
            };

            // Everyone else observes this turn's destructions; observers
            // waiting on the destroyed obstacle become active again.
            for destroyed in self.world.take_pending_destructions() {
                for (j, other) in self.minds.iter_mut().enumerate() {
                    if j == idx {
                        continue;
                    }
                    let watching = other.obstacle_signs.values().any(|id| *id == destroyed);
                    other.on_destruction(destroyed);
                    if watching && states[j] == AgentState::AwaitingAssistance {
                        states[j] = AgentState::Active;
                    }
                }
            }

            if bus.is_empty() && states.iter().all(|s| *s != AgentState::Active) {
                if self.all_arrived() {
                    break RunOutcome::Success;
                }
                break self.stalemate_outcome(&states);
            }
        };

        trace.record(
            tick,
            None,
            EventKind::RunEnd {
                outcome: match &outcome {
                    RunOutcome::Success => "success".to_owned(),
                    RunOutcome::Failure { .. } => "failure".to_owned(),
                    RunOutcome::TickCapExceeded => "tick_cap_exceeded".to_owned(),
                },
            },
        );
        for mind in &mut self.minds {
            if let RunOutcome::Success = outcome {
                if mind.goal_satisfied() {
                    mind.plan.status = PlanStatus::Success;
                }
            }
        }
        CoalitionRun {
            outcome,
            trace,
            plans: self
                .minds
                .iter()
                .map(|m| (m.agent_id, m.plan.clone()))
                .collect(),
            messages,
            final_world: self.world.workspace.clone(),
        }
    }

    fn all_arrived(&self) -> bool {
        self.minds.iter().all(|m| m.body_in_goal_area())
    }

    fn stalemate_outcome(&self, states: &[AgentState]) -> RunOutcome {
        let failures = self
            .minds
            .iter()
            .zip(states)
            .map(|(mind, state)| {
                let detail = match &mind.plan.status {
                    PlanStatus::Failure { reason } => reason.to_string(),
                    _ => match state {
                        AgentState::Satisfied => "satisfied".to_owned(),
                        AgentState::AwaitingAssistance => {
                            FailureReason::AssistanceUnavailable {
                                action: String::new(),
                                obstacle_sign: String::new(),
                            }
                            .to_string()
                        }
                        _ => "idle".to_owned(),
                    },
                };
                (mind.agent_id, detail)
            })
            .collect();
        RunOutcome::Failure { failures }
    }
}

fn run_geometry(
    world: &WorldState,
    capabilities: &CapabilityMatrix,
    minds: &[AgentMind],
) -> RunGeometry {
    RunGeometry {
        bounds: world.workspace.bounds,
        res: world.res,
        obstacles: world.workspace.obstacles.clone(),
        destroyable_types: capabilities
            .destroyable_by
            .iter()
            .filter(|(_, agents)| !agents.is_empty())
            .map(|(t, _)| t.clone())
            .collect(),
        agents: minds
            .iter()
            .map(|m| AgentGeometry {
                id: m.agent_id,
                radius: m.body.radius,
                start: m.body.position,
                goal: m.goal_area,
            })
            .collect(),
    }
}
