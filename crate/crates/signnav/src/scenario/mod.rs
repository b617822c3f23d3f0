//! Scenario files: a human-readable nested key-value format describing the
//! workspace, the grid resolution, obstacle types with their destroy
//! capabilities, and per-agent planner parameters, place bindings and sign
//! knowledge bases.
//!
//! Parsing either yields a fully validated [`Scenario`] or a list of
//! diagnostics, each carrying a source position. The grammar is documented
//! in the book (`book/src/scenarios.md`) together with an EBNF.

mod parse;

pub use parse::parse_scenario;

use crate::behavior::{AgentMind, BehaviorError};
use crate::coalition::{CapabilityMatrix, Coalition, WorldState};
use crate::geometry::{AgentBody, AgentId, Obstacle, ObstacleId, Point, Rect, Workspace};
use crate::path::GoalArea;
use crate::sign::{CausalRelation, Feature, KnowledgeBase, Operator, Sign, Situation};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticKind {
    Syntax,
    UnresolvedReference,
    CommonSignMismatch,
    Geometry,
    Semantics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {:?}: {}", self.line, self.col, self.kind, self.message)
    }
}

/// Declared obstacle before workspace construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub id: ObstacleId,
    pub obstacle_type: String,
    pub vertices: Vec<Point>,
}

/// Per-agent declaration: body, planner parameters, situations, place and
/// obstacle-sign bindings, and the sign knowledge base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: AgentId,
    pub self_sign: String,
    pub public_sign: String,
    pub position: Point,
    pub radius: f64,
    pub goal_area: GoalArea,
    pub alpha_max: f64,
    pub alpha_fallback: Option<f64>,
    pub step: u32,
    pub introspection: bool,
    pub start_situation: Vec<Vec<String>>,
    pub goal_situation: Vec<Vec<String>>,
    pub places: BTreeMap<String, GoalArea>,
    pub obstacle_signs: BTreeMap<String, ObstacleId>,
    pub channels: BTreeSet<String>,
    pub signs: Vec<Sign>,
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub bounds: Rect,
    pub res: f64,
    pub types: BTreeMap<String, Vec<AgentId>>,
    pub obstacles: Vec<ObstacleSpec>,
    pub iteration_cap: u32,
    pub tick_cap: u64,
    pub agents: Vec<AgentSpec>,
}

impl Scenario {
    /// Builds the shared workspace from the declarations.
    pub fn workspace(&self) -> Result<Workspace, crate::geometry::WorldError> {
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| Obstacle::new(o.id, o.vertices.clone(), o.obstacle_type.clone()))
            .collect();
        let agents = self
            .agents
            .iter()
            .map(|a| AgentBody { id: a.id, position: a.position, radius: a.radius })
            .collect();
        Workspace::new(self.bounds, obstacles, agents)
    }

    pub fn capability_matrix(&self) -> CapabilityMatrix {
        CapabilityMatrix { destroyable_by: self.types.clone() }
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentSpec> {
        self.agents.iter().find(|a| a.id == id)
    }

    /// Instantiates the coalition runtime for this scenario.
    pub fn coalition(&self) -> Result<Coalition, ScenarioBuildError> {
        let workspace = self.workspace()?;
        let world = WorldState::new(workspace, self.res)?;
        let mut minds = Vec::new();
        for spec in &self.agents {
            minds.push(spec.mind(self)?);
        }
        Ok(Coalition {
            world,
            minds,
            capabilities: self.capability_matrix(),
            tick_cap: self.tick_cap,
            scenario_name: self.name.clone(),
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioBuildError {
    #[error(transparent)]
    World(#[from] crate::geometry::WorldError),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error(transparent)]
    Sign(#[from] crate::sign::SignError),
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

impl AgentSpec {
    pub fn knowledge_base(&self) -> Result<KnowledgeBase, crate::sign::SignError> {
        KnowledgeBase::new(self.signs.clone(), self.channels.clone())
    }

    pub fn situation(groups: &[Vec<String>]) -> Situation {
        Situation::from_groups(groups.iter().map(|g| g.iter().cloned()))
    }

    /// Builds the agent's planning mind.
    pub fn mind(&self, scenario: &Scenario) -> Result<AgentMind, ScenarioBuildError> {
        let kb = self.knowledge_base()?;
        let body = AgentBody { id: self.id, position: self.position, radius: self.radius };
        let mut mind = AgentMind::new(
            self.id,
            self.self_sign.clone(),
            self.public_sign.clone(),
            kb,
            Self::situation(&self.start_situation),
            Self::situation(&self.goal_situation),
            body,
            self.goal_area,
        )?;
        mind.introspection = self.introspection;
        mind.alpha_max = self.alpha_max;
        mind.alpha_fallback = self.alpha_fallback;
        mind.step = self.step;
        mind.iteration_cap = scenario.iteration_cap;
        mind.places = self.places.clone();
        mind.obstacle_signs = self.obstacle_signs.clone();
        Ok(mind)
    }
}

/// Semantic validation shared by the parser. Returns all problems found.
pub(crate) fn validate(scenario: &Scenario, positions: &Positions) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let fallback = Pos { line: 1, col: 1 };
    let mut diag = |pos: Pos, kind: DiagnosticKind, message: String| {
        out.push(Diagnostic { line: pos.line, col: pos.col, kind, message });
    };

    if scenario.bounds.is_degenerate() {
        diag(positions.world.unwrap_or(fallback), DiagnosticKind::Geometry, "workspace bounds are degenerate".into());
    }
    if scenario.res <= 0.0 {
        diag(positions.world.unwrap_or(fallback), DiagnosticKind::Semantics, "res must be positive".into());
    }
    if scenario.agents.is_empty() {
        diag(fallback, DiagnosticKind::Semantics, "scenario declares no agents".into());
    }

    // Obstacles: unique ids, declared types, simple polygons inside bounds.
    let mut obstacle_ids = BTreeSet::new();
    for obs in &scenario.obstacles {
        let pos = positions.obstacles.get(&obs.id).copied().unwrap_or(fallback);
        if !obstacle_ids.insert(obs.id) {
            diag(pos, DiagnosticKind::Semantics, format!("duplicate obstacle id {}", obs.id));
        }
        if !scenario.types.contains_key(&obs.obstacle_type) {
            diag(
                pos,
                DiagnosticKind::UnresolvedReference,
                format!("obstacle {} has undeclared type {:?}", obs.id, obs.obstacle_type),
            );
        }
        if obs.vertices.len() < 3 {
            diag(pos, DiagnosticKind::Geometry, format!("obstacle {} has fewer than 3 vertices", obs.id));
        } else if !crate::geometry::polygon_is_simple(&obs.vertices) {
            diag(pos, DiagnosticKind::Geometry, format!("obstacle {} is not a simple polygon", obs.id));
        }
        for v in &obs.vertices {
            if !scenario.bounds.contains(*v) {
                diag(
                    pos,
                    DiagnosticKind::Geometry,
                    format!("obstacle {} has vertex ({}, {}) outside bounds", obs.id, v.x, v.y),
                );
                break;
            }
        }
    }

    // Capability matrix references declared agents.
    let agent_ids: BTreeSet<AgentId> = scenario.agents.iter().map(|a| a.id).collect();
    for (ty, agents) in &scenario.types {
        for id in agents {
            if !agent_ids.contains(id) {
                diag(
                    positions.world.unwrap_or(fallback),
                    DiagnosticKind::UnresolvedReference,
                    format!("type {ty:?} is destroyable by unknown agent {id}"),
                );
            }
        }
    }

    let mut seen_agents = BTreeSet::new();
    let radius = scenario.agents.first().map(|a| a.radius);
    for agent in &scenario.agents {
        let pos = positions.agents.get(&agent.id).copied().unwrap_or(fallback);
        if !seen_agents.insert(agent.id) {
            diag(pos, DiagnosticKind::Semantics, format!("duplicate agent id {}", agent.id));
        }
        if agent.radius <= 0.0 {
            diag(pos, DiagnosticKind::Semantics, format!("agent {} radius must be positive", agent.id));
        }
        if Some(agent.radius) != radius {
            diag(pos, DiagnosticKind::Semantics, "all agents must share one radius".into());
        }
        if scenario.res < 2.0 * agent.radius {
            diag(
                pos,
                DiagnosticKind::Geometry,
                format!("res {} is coarser than twice the radius of agent {}", scenario.res, agent.id),
            );
        }
        if !scenario.bounds.contains(agent.position) {
            diag(pos, DiagnosticKind::Geometry, format!("agent {} starts outside bounds", agent.id));
        }
        if !(agent.alpha_max > 0.0 && agent.alpha_max <= 180.0) {
            diag(pos, DiagnosticKind::Semantics, format!("agent {}: alpha_max must lie in (0, 180]", agent.id));
        }
        if let Some(fb) = agent.alpha_fallback {
            if !(fb > 0.0 && fb <= 180.0) {
                diag(pos, DiagnosticKind::Semantics, format!("agent {}: alpha_fallback must lie in (0, 180]", agent.id));
            }
        }
        if agent.step == 0 {
            diag(pos, DiagnosticKind::Semantics, format!("agent {}: step must be at least 1", agent.id));
        }

        // Knowledge base structural validation.
        let kb = match agent.knowledge_base() {
            Ok(kb) => kb,
            Err(err) => {
                diag(pos, DiagnosticKind::UnresolvedReference, format!("agent {}: {err}", agent.id));
                continue;
            }
        };
        for name in [&agent.self_sign, &agent.public_sign] {
            if !kb.contains(name) {
                diag(
                    pos,
                    DiagnosticKind::UnresolvedReference,
                    format!("agent {}: sign {name:?} missing from its knowledge base", agent.id),
                );
            }
        }
        for (label, groups) in
            [("start_situation", &agent.start_situation), ("goal_situation", &agent.goal_situation)]
        {
            for name in groups.iter().flatten() {
                if !kb.contains(name) {
                    diag(
                        pos,
                        DiagnosticKind::UnresolvedReference,
                        format!("agent {}: {label} references unknown sign {name:?}", agent.id),
                    );
                }
            }
        }
        for (sign_name, obstacle_id) in &agent.obstacle_signs {
            if !kb.contains(sign_name) {
                diag(
                    pos,
                    DiagnosticKind::UnresolvedReference,
                    format!("agent {}: obstacle_sign {sign_name:?} missing from the knowledge base", agent.id),
                );
            }
            if !scenario.obstacles.iter().any(|o| o.id == *obstacle_id) {
                diag(
                    pos,
                    DiagnosticKind::UnresolvedReference,
                    format!("agent {}: obstacle_sign {sign_name:?} binds unknown obstacle {obstacle_id}", agent.id),
                );
            }
        }
        if !agent.obstacle_signs.is_empty() && !kb.contains("empty") {
            diag(
                pos,
                DiagnosticKind::Semantics,
                format!("agent {}: a knowledge base with obstacle signs needs the sign \"empty\"", agent.id),
            );
        }
        // Operators must resolve against the agent's bindings.
        for sign in &agent.signs {
            for relation in sign.significance.iter().chain(sign.meaning.iter()) {
                for feature in relation.features() {
                    if let Feature::Operator(op) = feature {
                        match op {
                            Operator::Relocate { place } => {
                                if !agent.places.contains_key(place) {
                                    diag(
                                        pos,
                                        DiagnosticKind::UnresolvedReference,
                                        format!("agent {}: relocate operator names unbound place {place:?}", agent.id),
                                    );
                                }
                            }
                            Operator::Destroy { obstacle_sign } => {
                                if !agent.obstacle_signs.contains_key(obstacle_sign) {
                                    diag(
                                        pos,
                                        DiagnosticKind::UnresolvedReference,
                                        format!("agent {}: destroy operator names unbound obstacle sign {obstacle_sign:?}", agent.id),
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Common signs: same name across agents means identical significance.
    let mut significances: BTreeMap<&str, (&AgentSpec, &Vec<CausalRelation>)> = BTreeMap::new();
    for agent in &scenario.agents {
        for sign in &agent.signs {
            match significances.get(sign.name.as_str()) {
                None => {
                    significances.insert(&sign.name, (agent, &sign.significance));
                }
                Some((first_agent, first)) => {
                    if *first != &sign.significance {
                        let pos = positions
                            .signs
                            .get(&(agent.id, sign.name.clone()))
                            .copied()
                            .unwrap_or(fallback);
                        diag(
                            pos,
                            DiagnosticKind::CommonSignMismatch,
                            format!(
                                "sign {:?} declares a different significance for agent {} than for agent {}",
                                sign.name, agent.id, first_agent.id
                            ),
                        );
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Pos {
    pub line: usize,
    pub col: usize,
}

/// Source positions of the declarations a semantic diagnostic can point at.
#[derive(Debug, Default)]
pub(crate) struct Positions {
    pub world: Option<Pos>,
    pub obstacles: BTreeMap<ObstacleId, Pos>,
    pub agents: BTreeMap<AgentId, Pos>,
    pub signs: BTreeMap<(AgentId, String), Pos>,
}

/// Canonical text form; `parse_scenario(serialize_scenario(s))` is
/// structurally equal to `s`.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    let mut w = String::new();
    let num = fmt_num;
    w.push_str(&format!("name: {}\n\n", quote(&scenario.name)));
    w.push_str("world {\n");
    w.push_str(&format!(
        "  bounds {{ x_min: {}  x_max: {}  y_min: {}  y_max: {} }}\n",
        num(scenario.bounds.x_min),
        num(scenario.bounds.x_max),
        num(scenario.bounds.y_min),
        num(scenario.bounds.y_max)
    ));
    w.push_str(&format!("  res: {}\n", num(scenario.res)));
    w.push_str("  types {\n");
    for (ty, agents) in &scenario.types {
        let ids: Vec<String> = agents.iter().map(|a| a.to_string()).collect();
        w.push_str(&format!("    {ty} {{ destroyable_by: [{}] }}\n", ids.join(", ")));
    }
    w.push_str("  }\n");
    for obs in &scenario.obstacles {
        let verts: Vec<String> = obs
            .vertices
            .iter()
            .map(|p| format!("({}, {})", num(p.x), num(p.y)))
            .collect();
        w.push_str(&format!(
            "  obstacle {{ id: {}  type: {}  vertices: [{}] }}\n",
            obs.id,
            obs.obstacle_type,
            verts.join(", ")
        ));
    }
    w.push_str("}\n\n");
    w.push_str(&format!(
        "limits {{ iteration_cap: {}  tick_cap: {} }}\n",
        scenario.iteration_cap, scenario.tick_cap
    ));
    for agent in &scenario.agents {
        w.push('\n');
        w.push_str("agent {\n");
        w.push_str(&format!("  id: {}\n", agent.id));
        w.push_str(&format!("  self_sign: {}\n", quote(&agent.self_sign)));
        w.push_str(&format!("  public_sign: {}\n", quote(&agent.public_sign)));
        w.push_str(&format!(
            "  position: ({}, {})\n",
            num(agent.position.x),
            num(agent.position.y)
        ));
        w.push_str(&format!("  radius: {}\n", num(agent.radius)));
        w.push_str(&format!(
            "  goal_area {{ cp: ({}, {})  r_g: {} }}\n",
            num(agent.goal_area.cp.x),
            num(agent.goal_area.cp.y),
            num(agent.goal_area.r_g)
        ));
        w.push_str(&format!("  alpha_max: {}\n", num(agent.alpha_max)));
        if let Some(fb) = agent.alpha_fallback {
            w.push_str(&format!("  alpha_fallback: {}\n", num(fb)));
        }
        w.push_str(&format!("  step: {}\n", agent.step));
        w.push_str(&format!("  introspection: {}\n", agent.introspection));
        w.push_str(&format!("  start_situation: {}\n", groups_str(&agent.start_situation)));
        w.push_str(&format!("  goal_situation: {}\n", groups_str(&agent.goal_situation)));
        for (place, area) in &agent.places {
            w.push_str(&format!(
                "  place {} {{ cp: ({}, {})  r_g: {} }}\n",
                quote(place),
                num(area.cp.x),
                num(area.cp.y),
                num(area.r_g)
            ));
        }
        for (sign, id) in &agent.obstacle_signs {
            w.push_str(&format!("  obstacle_sign {}: {}\n", quote(sign), id));
        }
        w.push_str("  signs {\n");
        if !agent.channels.is_empty() {
            let chans: Vec<String> = agent.channels.iter().cloned().collect();
            w.push_str(&format!("    channels: [{}]\n", chans.join(", ")));
        }
        for sign in &agent.signs {
            write_sign(&mut w, sign);
        }
        w.push_str("  }\n");
        w.push_str("}\n");
    }
    w
}

fn write_sign(w: &mut String, sign: &Sign) {
    w.push_str(&format!("    sign {} {{\n", quote(&sign.name)));
    if !sign.image.is_empty() {
        w.push_str(&format!("      image: {}\n", feature_groups_str(&sign.image)));
    }
    for relation in &sign.significance {
        write_relation(w, "significance", relation);
    }
    for relation in &sign.meaning {
        write_relation(w, "meaning", relation);
    }
    if !sign.links.is_empty() {
        let entries: Vec<String> = sign
            .links
            .iter()
            .map(|(k, v)| {
                let targets: Vec<String> = v.iter().map(|i| i.to_string()).collect();
                format!("{k}: [{}]", targets.join(", "))
            })
            .collect();
        w.push_str(&format!("      links {{ {} }}\n", entries.join("  ")));
    }
    w.push_str("    }\n");
}

fn write_relation(w: &mut String, kind: &str, relation: &CausalRelation) {
    w.push_str(&format!("      {kind} {} {{", quote(&relation.label)));
    if !relation.conditions.is_empty() {
        w.push_str(&format!(" conditions: {}", feature_groups_str(&relation.conditions)));
    }
    if !relation.effects.is_empty() {
        w.push_str(&format!(" effects: {}", feature_groups_str(&relation.effects)));
    }
    w.push_str(" }\n");
}

fn feature_groups_str(groups: &[Vec<Feature>]) -> String {
    let inner: Vec<String> = groups
        .iter()
        .map(|g| {
            let fs: Vec<String> = g.iter().map(feature_str).collect();
            format!("[{}]", fs.join(", "))
        })
        .collect();
    format!("[{}]", inner.join(", "))
}

fn feature_str(f: &Feature) -> String {
    match f {
        Feature::SignLink { name } => quote(name),
        Feature::SensorDatum { channel, value } => format!("sensor({channel}, {})", quote(value)),
        Feature::PersonalFeature { property } => format!("personal({})", quote(property)),
        Feature::Operator(Operator::Relocate { place }) => format!("relocate({})", quote(place)),
        Feature::Operator(Operator::Destroy { obstacle_sign }) => {
            format!("destroy({})", quote(obstacle_sign))
        }
    }
}

fn groups_str(groups: &[Vec<String>]) -> String {
    let inner: Vec<String> = groups
        .iter()
        .map(|g| {
            let names: Vec<String> = g.iter().map(|n| quote(n)).collect();
            format!("[{}]", names.join(", "))
        })
        .collect();
    format!("[{}]", inner.join(", "))
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{:.1}", x)
    } else {
        format!("{x}")
    }
}
