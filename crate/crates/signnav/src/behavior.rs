//! Iterative behavior planning over a sign knowledge base.
//!
//! Each invocation runs match -> adopt -> project cycles: find the
//! significance relations whose effects cover the most goal signs, map the
//! best candidate to one of the agent's own personal-meaning relations, and
//! project that relation's conditions into a new target situation. When the
//! projected situation is already contained in the current one the selected
//! relation is executed: its meaning is expanded down to operators, relocation
//! operators invoke the path planner, destruction operators mutate the shared
//! world. A path planner failure feeds the blocking obstacle back into the
//! situations and the cycle restarts; a missing realization turns into a
//! goal-delegation message to a capable coalition member.

use crate::coalition::{CapabilityMatrix, Message, MessageBus, RelationDescription, WorldState};
use crate::geometry::{AgentBody, AgentId, ObstacleId, Point};
use crate::path::{plan, GoalArea, Path, PlanResult};
use crate::sign::{effect_coverage, Feature, KnowledgeBase, Operator, SignError, Situation};
use crate::trace::{Candidate, EventKind, PathOutcome, TraceLog};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// One step of an executed behavior plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum PlanStep {
    Relocate { place: String, polyline: Vec<Point>, length: f64, max_turn: f64 },
    Destroy { obstacle_sign: String, obstacle_id: ObstacleId },
    SendMessage { message: Message },
    Subgoal { situation: Situation },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum FailureReason {
    NoApplicableSignificance,
    IterationCapExceeded,
    GoalAreaInvalid,
    PlanningCycle,
    AngleConstraintInfeasible { place: String },
    AssistanceUnavailable { action: String, obstacle_sign: String },
    IntrospectionDisabled,
    UnrecognizedObstacle,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureReason::NoApplicableSignificance => write!(f, "no applicable significance"),
            FailureReason::IterationCapExceeded => write!(f, "iteration cap exceeded"),
            FailureReason::GoalAreaInvalid => write!(f, "goal area invalid"),
            FailureReason::PlanningCycle => write!(f, "planning cycle detected"),
            FailureReason::AngleConstraintInfeasible { place } => {
                write!(f, "angle constraint infeasible for {place}")
            }
            FailureReason::AssistanceUnavailable { action, obstacle_sign } => {
                write!(f, "no coalition member can perform {action} on {obstacle_sign}")
            }
            FailureReason::IntrospectionDisabled => write!(f, "introspection disabled"),
            FailureReason::UnrecognizedObstacle => write!(f, "blocking obstacle not recognized"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PlanStatus {
    InProgress,
    Success,
    Failure { reason: FailureReason },
}

/// Accumulated plan of one agent across the whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorPlan {
    pub steps: Vec<PlanStep>,
    pub messages_sent: Vec<Message>,
    pub status: PlanStatus,
}

impl Default for BehaviorPlan {
    fn default() -> Self {
        Self { steps: Vec::new(), messages_sent: Vec::new(), status: PlanStatus::InProgress }
    }
}

/// Outcome of a single planner invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum InvocationOutcome {
    /// The goal situation is contained in the current situation.
    Satisfied,
    /// A delegation message is pending; nothing to do until the world changes.
    AwaitingAssistance,
    Failed(FailureReason),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BehaviorError {
    #[error("situation references sign {0:?} absent from the knowledge base")]
    UnknownSituationSign(String),
    #[error(transparent)]
    Sign(#[from] SignError),
}

/// An agent's planning state: knowledge base, situations, body and planner
/// parameters, plus the plan accumulated so far.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentMind {
    pub agent_id: AgentId,
    pub self_sign: String,
    pub public_sign: String,
    pub kb: KnowledgeBase,
    pub introspection: bool,
    pub current: Situation,
    pub goal: Situation,
    pub body: AgentBody,
    pub goal_area: GoalArea,
    pub alpha_max: f64,
    pub alpha_fallback: Option<f64>,
    pub step: u32,
    pub iteration_cap: u32,
    pub places: BTreeMap<String, GoalArea>,
    pub obstacle_signs: BTreeMap<String, ObstacleId>,
    pub plan: BehaviorPlan,
    delegated: BTreeSet<(String, String)>,
    location_group: Option<BTreeSet<String>>,
}

impl AgentMind {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        agent_id: AgentId,
        self_sign: impl Into<String>,
        public_sign: impl Into<String>,
        kb: KnowledgeBase,
        current: Situation,
        goal: Situation,
        body: AgentBody,
        goal_area: GoalArea,
    ) -> Result<Self, BehaviorError> {
        let mind = Self {
            agent_id,
            self_sign: self_sign.into(),
            public_sign: public_sign.into(),
            kb,
            introspection: true,
            current,
            goal,
            body,
            goal_area,
            alpha_max: 180.0,
            alpha_fallback: None,
            step: 5,
            iteration_cap: 100,
            places: BTreeMap::new(),
            obstacle_signs: BTreeMap::new(),
            plan: BehaviorPlan::default(),
            delegated: BTreeSet::new(),
            location_group: None,
        };
        for sign in mind.current.signs().iter().chain(mind.goal.signs().iter()) {
            if !mind.kb.contains(sign) {
                return Err(BehaviorError::UnknownSituationSign(sign.clone()));
            }
        }
        Ok(mind)
    }

    /// Action labels the agent can realize itself: labels of significance
    /// relations with at least one linked personal meaning.
    pub fn capabilities(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for sign in self.kb.signs() {
            for (i, relation) in sign.significance.iter().enumerate() {
                if self
                    .kb
                    .realizations(&sign.name, i)
                    .map(|r| !r.is_empty())
                    .unwrap_or(false)
                {
                    out.insert(relation.label.clone());
                }
            }
        }
        out
    }

    pub fn goal_satisfied(&self) -> bool {
        self.goal.is_subset_of(&self.current)
    }

    pub fn body_in_goal_area(&self) -> bool {
        self.body.position.distance(self.goal_area.cp) <= self.goal_area.r_g
    }

    /// Reacts to a destruction in the shared world: groups naming the
    /// destroyed obstacle's sign leave both situations and any delegation
    /// asking for its destruction is considered answered.
    pub fn on_destruction(&mut self, obstacle_id: ObstacleId) {
        let signs: Vec<String> = self
            .obstacle_signs
            .iter()
            .filter(|(_, id)| **id == obstacle_id)
            .map(|(name, _)| name.clone())
            .collect();
        for sign in signs {
            self.current.retain_without(&sign);
            self.goal.retain_without(&sign);
            self.delegated.retain(|(_, os)| os != &sign);
        }
    }

    /// Appends the goal augmentation carried by a delegation message.
    /// Returns the appended group (empty when the goal already contained it).
    pub fn on_message(&mut self, message: &Message) -> Result<Vec<String>, BehaviorError> {
        for name in message
            .payload
            .sign_names()
            .chain(std::iter::once(message.required_action.as_str()))
            .chain(message.obstacle_sign.as_deref())
        {
            if !self.kb.contains(name) {
                return Err(BehaviorError::UnknownSituationSign(name.to_owned()));
            }
        }
        let mut group: BTreeSet<String> = message
            .payload
            .effects
            .iter()
            .flatten()
            .cloned()
            .collect();
        if let Some(obstacle_sign) = &message.obstacle_sign {
            group.insert(obstacle_sign.clone());
        }
        if self.goal.push_group(group.clone()) {
            Ok(group.into_iter().collect())
        } else {
            Ok(Vec::new())
        }
    }
}

/// Candidate significances for a target situation: every relation tied for
/// the maximum positive effect coverage, ordered by (sign name, index).
pub fn match_significances(kb: &KnowledgeBase, target: &Situation) -> Vec<Candidate> {
    let mut best = 0usize;
    let mut out: Vec<Candidate> = Vec::new();
    for sign in kb.signs() {
        for (index, relation) in sign.significance.iter().enumerate() {
            let coverage = effect_coverage(relation, target);
            if coverage == 0 {
                continue;
            }
            match coverage.cmp(&best) {
                std::cmp::Ordering::Greater => {
                    best = coverage;
                    out.clear();
                    out.push(Candidate {
                        sign: sign.name.clone(),
                        index,
                        label: relation.label.clone(),
                        coverage,
                    });
                }
                std::cmp::Ordering::Equal => out.push(Candidate {
                    sign: sign.name.clone(),
                    index,
                    label: relation.label.clone(),
                    coverage,
                }),
                std::cmp::Ordering::Less => {}
            }
        }
    }
    // KnowledgeBase::signs iterates in name order, so candidates are already
    // sorted by (sign name, index).
    out
}

/// Adoption outcome: a personal-meaning relation of one's own, or a request
/// for assistance with the best unrealizable candidate.
#[derive(Debug, Clone, PartialEq)]
pub enum Adoption {
    Selected { sign: String, pm_index: usize, label: String },
    AssistanceNeeded(Candidate),
}

/// Maps candidates through their realization links in order and picks the
/// first nonempty personal meaning (declaration order within the sign).
pub fn adopt_realization(kb: &KnowledgeBase, candidates: &[Candidate]) -> Option<Adoption> {
    let first = candidates.first()?;
    for candidate in candidates {
        if let Ok(realizations) = kb.realizations(&candidate.sign, candidate.index) {
            if let Some((pm_index, relation)) = realizations.first() {
                return Some(Adoption::Selected {
                    sign: candidate.sign.clone(),
                    pm_index: *pm_index,
                    label: relation.label.clone(),
                });
            }
        }
    }
    Some(Adoption::AssistanceNeeded(first.clone()))
}

/// Projects a personal-meaning relation's conditions into a new target
/// situation, preserving column-group structure and deduplicating signs
/// within each group.
pub fn project_conditions(kb: &KnowledgeBase, sign: &str, pm_index: usize) -> Situation {
    let relation = kb
        .sign(sign)
        .and_then(|s| s.meaning.get(pm_index))
        .expect("projection of a validated relation");
    let groups: Vec<BTreeSet<String>> = relation
        .conditions
        .iter()
        .map(|group| {
            group
                .iter()
                .filter_map(|f| f.sign_name().map(str::to_owned))
                .collect::<BTreeSet<String>>()
        })
        .filter(|g: &BTreeSet<String>| !g.is_empty())
        .collect();
    Situation { groups }
}

/// Low-level features describing an obstacle by its coordinates: links to the
/// place signs whose areas contain the polygon's centroid plus a link to the
/// obstacle-type sign, when those signs exist in the knowledge base.
pub fn obstacle_features(mind: &AgentMind, world: &WorldState, coords: &[Point]) -> Vec<Feature> {
    let n = coords.len().max(1) as f64;
    let centroid = Point::new(
        coords.iter().map(|p| p.x).sum::<f64>() / n,
        coords.iter().map(|p| p.y).sum::<f64>() / n,
    );
    let mut features = Vec::new();
    for (place, area) in &mind.places {
        if centroid.distance(area.cp) <= area.r_g {
            features.push(Feature::link(place.clone()));
        }
    }
    if let Some(obs) = world
        .workspace
        .obstacles
        .iter()
        .find(|o| o.vertices == coords)
    {
        let type_sign = format!("type {}", obs.obstacle_type);
        if mind.kb.contains(&type_sign) {
            features.push(Feature::link(type_sign));
        }
    }
    features
}

/// Recognizes the blocking obstacle from its coordinates and augments both
/// situations: the obstacle sign joins the current situation as a new group
/// and `{obstacle sign, "empty"}` joins the goal. Idempotent per obstacle.
pub fn incorporate_obstacle(
    mind: &mut AgentMind,
    world: &WorldState,
    coords: &[Point],
) -> Result<String, FailureReason> {
    let features = obstacle_features(mind, world, coords);
    let activated = mind
        .kb
        .recognize(&features)
        .map_err(|_| FailureReason::UnrecognizedObstacle)?;
    let mut candidates: Vec<&String> = mind
        .obstacle_signs
        .keys()
        .filter(|name| activated.contains(*name))
        .collect();
    // Prefer a candidate whose bound obstacle has exactly these coordinates.
    candidates.sort_by_key(|name| {
        let exact = mind
            .obstacle_signs
            .get(*name)
            .and_then(|id| world.workspace.obstacle(*id))
            .map(|o| o.vertices == coords)
            .unwrap_or(false);
        (!exact, (*name).clone())
    });
    let sign = candidates.first().ok_or(FailureReason::UnrecognizedObstacle)?.to_string();

    mind.current.push_group([sign.clone()].into_iter().collect());
    mind.goal
        .push_group([sign.clone(), "empty".to_owned()].into_iter().collect());
    Ok(sign)
}

enum ExecuteOutcome {
    Done,
    Reiterate,
    Fail(FailureReason),
}

/// Runs one full planner invocation for `mind` against the shared world.
pub fn run_behavior(
    mind: &mut AgentMind,
    world: &mut WorldState,
    bus: &mut MessageBus,
    capabilities: &CapabilityMatrix,
    trace: &mut TraceLog,
    tick: u64,
) -> InvocationOutcome {
    let agent = Some(mind.agent_id);
    let mut iterations = 0u32;
    let mut target = mind.goal.clone();
    let mut visited: BTreeSet<String> = [target.canonical()].into_iter().collect();

    loop {
        if mind.goal_satisfied() {
            mind.plan.status = PlanStatus::Success;
            return InvocationOutcome::Satisfied;
        }
        iterations += 1;
        if iterations > mind.iteration_cap {
            return fail(mind, trace, tick, FailureReason::IterationCapExceeded);
        }
        trace.record(tick, agent, EventKind::Iteration { iteration: iterations });

        let candidates = match_significances(&mind.kb, &target);
        trace.record(
            tick,
            agent,
            EventKind::SignificanceCandidates { candidates: candidates.clone() },
        );
        if candidates.is_empty() {
            return fail(mind, trace, tick, FailureReason::NoApplicableSignificance);
        }

        match adopt_realization(&mind.kb, &candidates).expect("candidates nonempty") {
            Adoption::AssistanceNeeded(candidate) => {
                trace.record(
                    tick,
                    agent,
                    EventKind::AssistanceNeeded {
                        sign: candidate.sign.clone(),
                        index: candidate.index,
                        label: candidate.label.clone(),
                    },
                );
                return request_assistance(mind, world, bus, capabilities, trace, tick, &candidate);
            }
            Adoption::Selected { sign, pm_index, label } => {
                trace.record(
                    tick,
                    agent,
                    EventKind::RealizationSelected {
                        sign: sign.clone(),
                        index: pm_index,
                        label: label.clone(),
                    },
                );
                let projected = project_conditions(&mind.kb, &sign, pm_index);
                trace.record(
                    tick,
                    agent,
                    EventKind::ConditionsProjected { situation: projected.clone() },
                );
                if projected.is_subset_of(&mind.current) {
                    if !mind.introspection {
                        mind.plan.steps.push(PlanStep::Subgoal { situation: projected });
                        return fail(mind, trace, tick, FailureReason::IntrospectionDisabled);
                    }
                    match execute_relation(mind, world, trace, tick, &sign, pm_index, &label) {
                        ExecuteOutcome::Done | ExecuteOutcome::Reiterate => {
                            target = mind.goal.clone();
                            visited = [target.canonical()].into_iter().collect();
                        }
                        ExecuteOutcome::Fail(reason) => return fail(mind, trace, tick, reason),
                    }
                } else {
                    if !mind.introspection {
                        mind.plan.steps.push(PlanStep::Subgoal { situation: projected.clone() });
                    }
                    if !visited.insert(projected.canonical()) {
                        return fail(mind, trace, tick, FailureReason::PlanningCycle);
                    }
                    target = projected;
                }
            }
        }
    }
}

fn fail(
    mind: &mut AgentMind,
    trace: &mut TraceLog,
    tick: u64,
    reason: FailureReason,
) -> InvocationOutcome {
    trace.record(
        tick,
        Some(mind.agent_id),
        EventKind::AgentFailed { reason: reason.to_string() },
    );
    mind.plan.status = PlanStatus::Failure { reason: reason.clone() };
    InvocationOutcome::Failed(reason)
}

/// Builds and sends a goal-delegation message for an unrealizable candidate.
fn request_assistance(
    mind: &mut AgentMind,
    world: &WorldState,
    bus: &mut MessageBus,
    capabilities: &CapabilityMatrix,
    trace: &mut TraceLog,
    tick: u64,
    candidate: &Candidate,
) -> InvocationOutcome {
    let relation = mind
        .kb
        .sign(&candidate.sign)
        .and_then(|s| s.significance.get(candidate.index))
        .expect("candidate indexes a validated relation");
    let obstacle_sign = relation
        .features()
        .filter_map(|f| f.sign_name())
        .find(|name| mind.obstacle_signs.contains_key(*name))
        .map(str::to_owned);

    let Some(obstacle_sign) = obstacle_sign else {
        return fail(
            mind,
            trace,
            tick,
            FailureReason::AssistanceUnavailable {
                action: candidate.label.clone(),
                obstacle_sign: String::new(),
            },
        );
    };
    let key = (candidate.label.clone(), obstacle_sign.clone());
    if mind.delegated.contains(&key) {
        trace.record(tick, Some(mind.agent_id), EventKind::AgentWaiting);
        return InvocationOutcome::AwaitingAssistance;
    }
    let obstacle_id = mind.obstacle_signs[&obstacle_sign];
    let recipient = world
        .workspace
        .obstacle(obstacle_id)
        .and_then(|obs| capabilities.capable_agents(&obs.obstacle_type))
        .into_iter()
        .flatten()
        .find(|id| *id != mind.agent_id);
    let Some(recipient) = recipient else {
        return fail(
            mind,
            trace,
            tick,
            FailureReason::AssistanceUnavailable {
                action: candidate.label.clone(),
                obstacle_sign,
            },
        );
    };

    let message = Message {
        sender: mind.agent_id,
        recipient,
        payload: RelationDescription::from_relation(relation),
        obstacle_sign: Some(obstacle_sign),
        obstacle_coords: world
            .workspace
            .obstacle(obstacle_id)
            .map(|o| o.vertices.clone()),
        required_action: candidate.label.clone(),
        sender_goal_facts: goal_facts(mind),
    };
    mind.plan.steps.push(PlanStep::SendMessage { message: message.clone() });
    mind.plan.messages_sent.push(message.clone());
    mind.delegated.insert(key);
    trace.record(
        tick,
        Some(mind.agent_id),
        EventKind::MessageSent { message: message.clone() },
    );
    bus.send(message).expect("recipient came from the capability matrix");
    InvocationOutcome::AwaitingAssistance
}

/// The sender's goal rendered communicably: its private self sign replaced by
/// its public name.
fn goal_facts(mind: &AgentMind) -> Vec<Vec<String>> {
    mind.goal
        .groups
        .iter()
        .map(|group| {
            group
                .iter()
                .map(|s| {
                    if s == &mind.self_sign {
                        mind.public_sign.clone()
                    } else {
                        s.clone()
                    }
                })
                .collect()
        })
        .collect()
}

fn execute_relation(
    mind: &mut AgentMind,
    world: &mut WorldState,
    trace: &mut TraceLog,
    tick: u64,
    sign: &str,
    pm_index: usize,
    label: &str,
) -> ExecuteOutcome {
    let mut expansion = Vec::new();
    let operators = match mind.kb.expand_meaning(sign, pm_index, &mut expansion) {
        Ok(ops) => ops,
        Err(_) => return ExecuteOutcome::Fail(FailureReason::NoApplicableSignificance),
    };
    trace.record(
        tick,
        Some(mind.agent_id),
        EventKind::ActionExecuted {
            sign: sign.to_owned(),
            index: pm_index,
            label: label.to_owned(),
            expansion,
        },
    );

    for op in &operators {
        match op {
            Operator::Relocate { place } => match execute_relocate(mind, world, trace, tick, place)
            {
                ExecuteOutcome::Done => {}
                other => return other,
            },
            Operator::Destroy { obstacle_sign } => {
                let Some(&obstacle_id) = mind.obstacle_signs.get(obstacle_sign) else {
                    return ExecuteOutcome::Fail(FailureReason::UnrecognizedObstacle);
                };
                let already = world
                    .workspace
                    .obstacle(obstacle_id)
                    .map(|o| o.destroyed)
                    .unwrap_or(true);
                if !already {
                    world.destroy(obstacle_id).expect("obstacle exists and not destroyed");
                    trace.record(
                        tick,
                        Some(mind.agent_id),
                        EventKind::Destruction { obstacle_id },
                    );
                    mind.plan.steps.push(PlanStep::Destroy {
                        obstacle_sign: obstacle_sign.clone(),
                        obstacle_id,
                    });
                    mind.on_destruction(obstacle_id);
                }
            }
        }
    }

    // The applied relation's effects join the current situation, except
    // groups naming obstacles that no longer exist.
    let relation = mind
        .kb
        .sign(sign)
        .and_then(|s| s.meaning.get(pm_index))
        .expect("executed relation exists");
    let effect_groups: Vec<BTreeSet<String>> = relation
        .effects
        .iter()
        .map(|group| {
            group
                .iter()
                .filter_map(|f| f.sign_name().map(str::to_owned))
                .collect::<BTreeSet<String>>()
        })
        .filter(|g: &BTreeSet<String>| !g.is_empty())
        .collect();
    for group in effect_groups {
        let names_destroyed = group.iter().any(|name| {
            mind.obstacle_signs
                .get(name)
                .and_then(|id| world.workspace.obstacle(*id))
                .map(|o| o.destroyed)
                .unwrap_or(false)
        });
        if !names_destroyed {
            mind.current.push_group(group);
        }
    }
    ExecuteOutcome::Done
}

fn execute_relocate(
    mind: &mut AgentMind,
    world: &mut WorldState,
    trace: &mut TraceLog,
    tick: u64,
    place: &str,
) -> ExecuteOutcome {
    let Some(area) = mind.places.get(place).copied() else {
        return ExecuteOutcome::Fail(FailureReason::GoalAreaInvalid);
    };
    let start = world.grid.cell_of_point(mind.body.position);
    let mut result = match plan(&world.grid, &world.workspace, start, &area, mind.alpha_max, mind.step)
    {
        Ok(result) => result,
        Err(_) => return ExecuteOutcome::Fail(FailureReason::GoalAreaInvalid),
    };
    if let (PlanResult::AngleInfeasible { .. }, Some(fallback)) = (&result, mind.alpha_fallback) {
        trace.record(
            tick,
            Some(mind.agent_id),
            EventKind::AlphaRelaxed { from: mind.alpha_max, to: fallback },
        );
        result = match plan(&world.grid, &world.workspace, start, &area, fallback, mind.step) {
            Ok(result) => result,
            Err(_) => return ExecuteOutcome::Fail(FailureReason::GoalAreaInvalid),
        };
    }
    let outcome = path_outcome(&world, &result);
    trace.record(
        tick,
        Some(mind.agent_id),
        EventKind::PathResult { place: place.to_owned(), result: outcome },
    );
    match result {
        PlanResult::Success(path) => {
            apply_relocation(mind, world, trace, tick, place, &path);
            ExecuteOutcome::Done
        }
        PlanResult::Blocked { obstacle_coords, .. } => {
            match incorporate_obstacle(mind, world, &obstacle_coords) {
                Ok(sign) => {
                    trace.record(
                        tick,
                        Some(mind.agent_id),
                        EventKind::ObstacleIncorporated { sign },
                    );
                    ExecuteOutcome::Reiterate
                }
                Err(reason) => ExecuteOutcome::Fail(reason),
            }
        }
        PlanResult::AngleInfeasible { .. } => ExecuteOutcome::Fail(
            FailureReason::AngleConstraintInfeasible { place: place.to_owned() },
        ),
        PlanResult::GoalAreaInvalid => ExecuteOutcome::Fail(FailureReason::GoalAreaInvalid),
    }
}

fn path_outcome(world: &WorldState, result: &PlanResult) -> PathOutcome {
    match result {
        PlanResult::Success(path) => PathOutcome::Success {
            polyline: path.polyline(&world.grid),
            length: path.length,
            max_turn: path.max_turn,
        },
        PlanResult::Blocked { obstacle_id, obstacle_coords } => PathOutcome::Blocked {
            obstacle_id: *obstacle_id,
            obstacle_coords: obstacle_coords.clone(),
        },
        PlanResult::AngleInfeasible { any_angle_path } => PathOutcome::AngleInfeasible {
            any_angle: any_angle_path.polyline(&world.grid),
        },
        PlanResult::GoalAreaInvalid => PathOutcome::GoalAreaInvalid,
    }
}

/// Relocation execution: the body teleports along the path to its end and the
/// arrival group `{self sign, place}` replaces the previous one.
fn apply_relocation(
    mind: &mut AgentMind,
    world: &mut WorldState,
    trace: &mut TraceLog,
    tick: u64,
    place: &str,
    path: &Path,
) {
    let polyline = path.polyline(&world.grid);
    let end = *polyline.last().expect("paths are nonempty");
    mind.body.position = end;
    if let Some(body) = world.workspace.agent_mut(mind.agent_id) {
        body.position = end;
    }
    mind.plan.steps.push(PlanStep::Relocate {
        place: place.to_owned(),
        polyline,
        length: path.length,
        max_turn: path.max_turn,
    });
    if let Some(group) = mind.location_group.take() {
        mind.current.groups.retain(|g| *g != group);
    }
    let group: BTreeSet<String> = [mind.self_sign.clone(), place.to_owned()].into_iter().collect();
    if mind.kb.contains(place) {
        mind.current.push_group(group.clone());
        mind.location_group = Some(group);
    }
    trace.record(
        tick,
        Some(mind.agent_id),
        EventKind::Relocated { place: place.to_owned(), position: end },
    );
    if mind.body_in_goal_area() {
        trace.record(tick, Some(mind.agent_id), EventKind::Arrival { position: end });
    }
}
