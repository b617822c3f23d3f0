//! Semiotic knowledge base.
//!
//! A sign couples a name with three components: an *image* (feature groups
//! used for bottom-up recognition), a *significance* (communicable causal
//! relations shared by every agent that knows the sign) and a *personal
//! meaning* (the agent's own realizations of those relations, down to
//! executable operators). Realization links tie significance relations to
//! the personal-meaning relations implementing them; the inverse direction
//! is what makes a relation communicable to another agent.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Executable operator at the bottom of a personal-meaning hierarchy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operator {
    /// Relocate into the area bound to a place sign.
    Relocate { place: String },
    /// Destroy the obstacle bound to an obstacle sign.
    Destroy { obstacle_sign: String },
}

impl std::fmt::Display for Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Operator::Relocate { place } => write!(f, "relocate({place})"),
            Operator::Destroy { obstacle_sign } => write!(f, "destroy({obstacle_sign})"),
        }
    }
}

/// A single feature: a link from a sign component to another sign, a sensor
/// datum, an agent-internal property, or an executable operator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "feature", rename_all = "snake_case")]
pub enum Feature {
    SignLink { name: String },
    SensorDatum { channel: String, value: String },
    PersonalFeature { property: String },
    Operator(Operator),
}

impl Feature {
    pub fn link(name: impl Into<String>) -> Feature {
        Feature::SignLink { name: name.into() }
    }

    pub fn sign_name(&self) -> Option<&str> {
        match self {
            Feature::SignLink { name } => Some(name),
            _ => None,
        }
    }
}

/// Ordered column group of features.
pub type FeatureGroup = Vec<Feature>;

/// Condition/effect rule owned by a sign. At least one feature must link back
/// to the owning sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalRelation {
    pub label: String,
    pub conditions: Vec<FeatureGroup>,
    pub effects: Vec<FeatureGroup>,
}

impl CausalRelation {
    pub fn features(&self) -> impl Iterator<Item = &Feature> {
        self.conditions.iter().chain(self.effects.iter()).flatten()
    }

    /// Distinct sign names among the effect features.
    pub fn effect_signs(&self) -> BTreeSet<String> {
        self.effects
            .iter()
            .flatten()
            .filter_map(|f| f.sign_name().map(str::to_owned))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Sign {
    pub name: String,
    pub image: Vec<FeatureGroup>,
    pub significance: Vec<CausalRelation>,
    pub meaning: Vec<CausalRelation>,
    /// Realization links: significance relation index -> personal-meaning
    /// relation indices.
    pub links: BTreeMap<usize, Vec<usize>>,
}

impl Sign {
    pub fn named(name: impl Into<String>) -> Sign {
        Sign { name: name.into(), ..Sign::default() }
    }
}

/// A structured set of activated signs: ordered groups of sign names.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Situation {
    pub groups: Vec<BTreeSet<String>>,
}

impl Situation {
    pub fn from_groups<I, G, S>(groups: I) -> Situation
    where
        I: IntoIterator<Item = G>,
        G: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Situation {
            groups: groups
                .into_iter()
                .map(|g| g.into_iter().map(Into::into).collect())
                .collect(),
        }
    }

    /// Union of all groups.
    pub fn signs(&self) -> BTreeSet<String> {
        self.groups.iter().flatten().cloned().collect()
    }

    /// Subset test over the union of groups; grouping is presentational.
    pub fn is_subset_of(&self, other: &Situation) -> bool {
        self.signs().is_subset(&other.signs())
    }

    /// Appends a group unless an equal group is already present.
    pub fn push_group(&mut self, group: BTreeSet<String>) -> bool {
        if group.is_empty() || self.groups.contains(&group) {
            return false;
        }
        self.groups.push(group);
        true
    }

    /// Removes every group containing the given sign. Returns how many were
    /// removed.
    pub fn retain_without(&mut self, sign: &str) -> usize {
        let before = self.groups.len();
        self.groups.retain(|g| !g.contains(sign));
        before - self.groups.len()
    }

    /// Canonical textual form: sorted sign names per group, groups sorted.
    /// Used for cycle detection and deterministic hashing.
    pub fn canonical(&self) -> String {
        let mut groups: Vec<String> = self
            .groups
            .iter()
            .map(|g| g.iter().cloned().collect::<Vec<_>>().join(","))
            .collect();
        groups.sort();
        groups.join(";")
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignError {
    #[error("duplicate sign name {0:?}")]
    DuplicateSign(String),
    #[error("sign {owner:?}: feature links to unknown sign {target:?}")]
    UnresolvedLink { owner: String, target: String },
    #[error("sign {owner:?}: sensor datum uses undeclared channel {channel:?}")]
    UnresolvedChannel { owner: String, channel: String },
    #[error("sign {owner:?}: relation {label:?} has no link back to its owner")]
    MissingSelfLink { owner: String, label: String },
    #[error("sign {owner:?}: relation {label:?} has empty conditions and effects")]
    EmptyRelation { owner: String, label: String },
    #[error("sign {owner:?}: significance relation {label:?} carries non-communicable features")]
    PersonalContentInSignificance { owner: String, label: String },
    #[error("sign {owner:?}: operator features are only allowed in personal meanings")]
    OperatorOutsideMeaning { owner: String },
    #[error("sign {owner:?}: realization link {kind} index {index} out of range")]
    LinkIndexOutOfRange { owner: String, kind: &'static str, index: usize },
    #[error("unknown sign {0:?}")]
    UnknownSign(String),
    #[error("sign {sign:?}: {kind} relation index {index} out of range")]
    IndexOutOfRange { sign: String, kind: &'static str, index: usize },
    #[error("input feature references unknown channel {0:?}")]
    UnresolvedInputChannel(String),
    #[error("input feature references unknown sign {0:?}")]
    UnresolvedInputSign(String),
    #[error("cyclic personal-meaning hierarchy at sign {sign:?} relation {index}")]
    CyclicHierarchy { sign: String, index: usize },
}

/// Immutable, validated collection of signs plus declared sensor channels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KnowledgeBase {
    signs: BTreeMap<String, Sign>,
    channels: BTreeSet<String>,
}

impl KnowledgeBase {
    pub fn new(signs: Vec<Sign>, channels: BTreeSet<String>) -> Result<Self, SignError> {
        let mut map = BTreeMap::new();
        for sign in signs {
            if map.insert(sign.name.clone(), sign.clone()).is_some() {
                return Err(SignError::DuplicateSign(sign.name));
            }
        }
        let kb = KnowledgeBase { signs: map, channels };
        kb.validate()?;
        Ok(kb)
    }

    fn validate(&self) -> Result<(), SignError> {
        for sign in self.signs.values() {
            for group in &sign.image {
                for feature in group {
                    match feature {
                        Feature::SignLink { name } => self.check_link(&sign.name, name)?,
                        Feature::SensorDatum { channel, .. } => {
                            if !self.channels.contains(channel) {
                                return Err(SignError::UnresolvedChannel {
                                    owner: sign.name.clone(),
                                    channel: channel.clone(),
                                });
                            }
                        }
                        Feature::Operator(_) => {
                            return Err(SignError::OperatorOutsideMeaning {
                                owner: sign.name.clone(),
                            })
                        }
                        Feature::PersonalFeature { .. } => {}
                    }
                }
            }
            for relation in &sign.significance {
                self.check_relation(sign, relation)?;
                for feature in relation.features() {
                    match feature {
                        Feature::PersonalFeature { .. } => {
                            return Err(SignError::PersonalContentInSignificance {
                                owner: sign.name.clone(),
                                label: relation.label.clone(),
                            })
                        }
                        Feature::Operator(_) => {
                            return Err(SignError::OperatorOutsideMeaning {
                                owner: sign.name.clone(),
                            })
                        }
                        _ => {}
                    }
                }
            }
            for relation in &sign.meaning {
                self.check_relation(sign, relation)?;
            }
            for (sig_index, pm_indices) in &sign.links {
                if *sig_index >= sign.significance.len() {
                    return Err(SignError::LinkIndexOutOfRange {
                        owner: sign.name.clone(),
                        kind: "significance",
                        index: *sig_index,
                    });
                }
                for pm in pm_indices {
                    if *pm >= sign.meaning.len() {
                        return Err(SignError::LinkIndexOutOfRange {
                            owner: sign.name.clone(),
                            kind: "meaning",
                            index: *pm,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_relation(&self, sign: &Sign, relation: &CausalRelation) -> Result<(), SignError> {
        if relation.conditions.iter().flatten().next().is_none()
            && relation.effects.iter().flatten().next().is_none()
        {
            return Err(SignError::EmptyRelation {
                owner: sign.name.clone(),
                label: relation.label.clone(),
            });
        }
        let mut has_self_link = false;
        for feature in relation.features() {
            match feature {
                Feature::SignLink { name } => {
                    self.check_link(&sign.name, name)?;
                    if name == &sign.name {
                        has_self_link = true;
                    }
                }
                Feature::SensorDatum { channel, .. } => {
                    if !self.channels.contains(channel) {
                        return Err(SignError::UnresolvedChannel {
                            owner: sign.name.clone(),
                            channel: channel.clone(),
                        });
                    }
                }
                _ => {}
            }
        }
        if !has_self_link {
            return Err(SignError::MissingSelfLink {
                owner: sign.name.clone(),
                label: relation.label.clone(),
            });
        }
        Ok(())
    }

    fn check_link(&self, owner: &str, target: &str) -> Result<(), SignError> {
        if self.signs.contains_key(target) {
            Ok(())
        } else {
            Err(SignError::UnresolvedLink { owner: owner.to_owned(), target: target.to_owned() })
        }
    }

    pub fn sign(&self, name: &str) -> Option<&Sign> {
        self.signs.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.signs.contains_key(name)
    }

    pub fn signs(&self) -> impl Iterator<Item = &Sign> {
        self.signs.values()
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn channels(&self) -> &BTreeSet<String> {
        &self.channels
    }

    /// Bottom-up recognition: a sign activates when one of its image groups is
    /// fully matched by input features and already-activated signs.
    /// Propagates to fixpoint over the sign hierarchy.
    pub fn recognize(&self, low_level: &[Feature]) -> Result<BTreeSet<String>, SignError> {
        for feature in low_level {
            match feature {
                Feature::SensorDatum { channel, .. } => {
                    if !self.channels.contains(channel) {
                        return Err(SignError::UnresolvedInputChannel(channel.clone()));
                    }
                }
                Feature::SignLink { name } => {
                    if !self.contains(name) {
                        return Err(SignError::UnresolvedInputSign(name.clone()));
                    }
                }
                _ => {}
            }
        }
        let input: BTreeSet<&Feature> = low_level.iter().collect();
        let mut activated: BTreeSet<String> = low_level
            .iter()
            .filter_map(|f| f.sign_name().map(str::to_owned))
            .collect();
        loop {
            let mut changed = false;
            for sign in self.signs.values() {
                if activated.contains(&sign.name) {
                    continue;
                }
                let matched = sign.image.iter().any(|group| {
                    !group.is_empty()
                        && group.iter().all(|feature| match feature {
                            Feature::SignLink { name } => {
                                activated.contains(name) || input.contains(feature)
                            }
                            other => input.contains(other),
                        })
                });
                if matched {
                    activated.insert(sign.name.clone());
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(activated)
    }

    /// Personal-meaning relations realizing a significance relation.
    /// An empty result means the agent has no realization of its own.
    pub fn realizations<'a>(
        &'a self,
        sign_name: &str,
        sig_index: usize,
    ) -> Result<Vec<(usize, &'a CausalRelation)>, SignError> {
        let sign = self
            .sign(sign_name)
            .ok_or_else(|| SignError::UnknownSign(sign_name.to_owned()))?;
        if sig_index >= sign.significance.len() {
            return Err(SignError::IndexOutOfRange {
                sign: sign_name.to_owned(),
                kind: "significance",
                index: sig_index,
            });
        }
        Ok(sign
            .links
            .get(&sig_index)
            .map(|pm_indices| {
                pm_indices
                    .iter()
                    .filter_map(|i| sign.meaning.get(*i).map(|r| (*i, r)))
                    .collect()
            })
            .unwrap_or_default())
    }

    /// Inverse realization lookup: significance relations a personal-meaning
    /// relation realizes. Used to build communicable message payloads.
    pub fn significances_of<'a>(
        &'a self,
        sign_name: &str,
        pm_index: usize,
    ) -> Result<Vec<(usize, &'a CausalRelation)>, SignError> {
        let sign = self
            .sign(sign_name)
            .ok_or_else(|| SignError::UnknownSign(sign_name.to_owned()))?;
        if pm_index >= sign.meaning.len() {
            return Err(SignError::IndexOutOfRange {
                sign: sign_name.to_owned(),
                kind: "meaning",
                index: pm_index,
            });
        }
        Ok(sign
            .links
            .iter()
            .filter(|(_, pms)| pms.contains(&pm_index))
            .filter_map(|(sig, _)| sign.significance.get(*sig).map(|r| (*sig, r)))
            .collect())
    }

    /// Depth-first expansion of a personal-meaning relation down to operators.
    ///
    /// Condition features are expanded: a sign link descends into the target
    /// sign's first personal-meaning relation (signs without one are leaves),
    /// personal features and sensor data are leaves, operators are collected
    /// in order. `trace` receives the visited relation labels and sign names.
    pub fn expand_meaning(
        &self,
        sign_name: &str,
        pm_index: usize,
        trace: &mut Vec<String>,
    ) -> Result<Vec<Operator>, SignError> {
        let mut operators = Vec::new();
        let mut visiting = BTreeSet::new();
        let sign = self
            .sign(sign_name)
            .ok_or_else(|| SignError::UnknownSign(sign_name.to_owned()))?;
        let relation = sign.meaning.get(pm_index).ok_or(SignError::IndexOutOfRange {
            sign: sign_name.to_owned(),
            kind: "meaning",
            index: pm_index,
        })?;
        trace.push(relation.label.clone());
        self.expand_into(sign_name, pm_index, &mut operators, trace, &mut visiting)?;
        Ok(operators)
    }

    fn expand_into(
        &self,
        sign_name: &str,
        pm_index: usize,
        operators: &mut Vec<Operator>,
        trace: &mut Vec<String>,
        visiting: &mut BTreeSet<(String, usize)>,
    ) -> Result<(), SignError> {
        let key = (sign_name.to_owned(), pm_index);
        if !visiting.insert(key) {
            return Err(SignError::CyclicHierarchy {
                sign: sign_name.to_owned(),
                index: pm_index,
            });
        }
        let sign = self
            .sign(sign_name)
            .ok_or_else(|| SignError::UnknownSign(sign_name.to_owned()))?;
        let relation = sign.meaning.get(pm_index).ok_or(SignError::IndexOutOfRange {
            sign: sign_name.to_owned(),
            kind: "meaning",
            index: pm_index,
        })?;
        for feature in relation.conditions.iter().flatten() {
            match feature {
                Feature::Operator(op) => {
                    trace.push(op.to_string());
                    operators.push(op.clone());
                }
                Feature::SignLink { name } => {
                    let target = self
                        .sign(name)
                        .ok_or_else(|| SignError::UnknownSign(name.clone()))?;
                    if !target.meaning.is_empty() {
                        trace.push(name.clone());
                        self.expand_into(name, 0, operators, trace, visiting)?;
                    }
                }
                Feature::PersonalFeature { .. } | Feature::SensorDatum { .. } => {}
            }
        }
        visiting.remove(&(sign_name.to_owned(), pm_index));
        Ok(())
    }
}

/// Number of distinct signs of `target` matched by the relation's effect
/// links.
pub fn effect_coverage(relation: &CausalRelation, target: &Situation) -> usize {
    let target_signs = target.signs();
    relation
        .effect_signs()
        .iter()
        .filter(|s| target_signs.contains(*s))
        .count()
}
