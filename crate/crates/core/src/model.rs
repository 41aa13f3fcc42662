// SPDX-License-Identifier: Apache-2.0

//! Allocation instances, relaxations and the knobs that parameterise a solve.
//!
//! An [`Instance`] is a bipartite graph between agents and resources with two
//! disjoint edge sets: pairs that are already compatible and pairs whose
//! incompatibility may be relaxed at a finite, strictly positive discomfort.
//! Pairs in neither set are totally incompatible. Instances are only built
//! through [`Instance::validate`], which sorts agents and resources by id and
//! edges by `(agent, resource)`; every downstream algorithm iterates in that
//! order, so tie-breaking is reproducible.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::matching::BipartiteGraph;
use crate::rational::{self, format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceId(pub String);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Strictly positive, finite, exact discomfort of relaxing one pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Discomfort(Rational);

impl Discomfort {
    pub fn new(value: Rational) -> Option<Self> {
        value.is_positive().then_some(Discomfort(value))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }
}

impl fmt::Display for Discomfort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

/// An (agent, resource) pair by index into the owning instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub agent: usize,
    pub resource: usize,
}

impl Edge {
    pub fn new(agent: usize, resource: usize) -> Self {
        Edge { agent, resource }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub id: AgentId,
    pub demand: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resource {
    pub id: ResourceId,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxableEdge {
    pub edge: Edge,
    pub discomfort: Discomfort,
}

/// Which side, if any, carries multiplicities above one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    OneToOne,
    /// Some agent demands several resources.
    ManyToOne,
    /// Some resource can host several agents.
    OneToMany,
}

fn one() -> u32 {
    1
}

fn is_one(v: &u32) -> bool {
    *v == 1
}

/// Unvalidated instance, exactly as read from (or written to) an instance file.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInstance {
    pub agents: Vec<RawAgent>,
    pub resources: Vec<RawResource>,
    #[serde(default)]
    pub compatible: Vec<(String, String)>,
    #[serde(default)]
    pub relaxable: Vec<RawRelaxable>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAgent {
    pub id: String,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub demand: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawResource {
    pub id: String,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRelaxable {
    pub agent: String,
    pub resource: String,
    #[serde(with = "rational::text")]
    pub discomfort: Rational,
}

impl RawAgent {
    pub fn new(id: impl Into<String>, demand: u32) -> Self {
        RawAgent {
            id: id.into(),
            demand,
        }
    }
}

impl RawResource {
    pub fn new(id: impl Into<String>, capacity: u32) -> Self {
        RawResource {
            id: id.into(),
            capacity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("{side} id must be nonempty")]
    EmptyId { side: &'static str },
    #[error("duplicate {side} id {id:?}")]
    DuplicateId { side: &'static str, id: String },
    #[error("{side} {id:?} must have a positive {what}")]
    NonPositiveMultiplicity {
        side: &'static str,
        id: String,
        what: &'static str,
    },
    #[error("edge ({agent}, {resource}) references an unknown endpoint")]
    DanglingEdge { agent: String, resource: String },
    #[error("edge ({agent}, {resource}) is both compatible and relaxable")]
    OverlappingEdgeSets { agent: String, resource: String },
    #[error("relaxable edge ({agent}, {resource}) listed twice")]
    DuplicateEdge { agent: String, resource: String },
    #[error("discomfort of ({agent}, {resource}) must be strictly positive")]
    NonPositiveDiscomfort { agent: String, resource: String },
    #[error("instance has both demands and capacities above one; many-to-many allocation is unsupported")]
    MixedDemandCapacity,
}

/// A validated, immutable allocation instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<Agent>,
    resources: Vec<Resource>,
    compatible: Vec<Edge>,
    relaxable: Vec<RelaxableEdge>,
    relaxable_lookup: HashMap<Edge, usize>,
}

impl Instance {
    /// Checks every instance invariant and returns the normalized instance.
    pub fn validate(raw: RawInstance) -> Result<Instance, ValidationError> {
        let mut agents: Vec<Agent> = Vec::with_capacity(raw.agents.len());
        for a in raw.agents {
            if a.id.is_empty() {
                return Err(ValidationError::EmptyId { side: "agent" });
            }
            if a.demand == 0 {
                return Err(ValidationError::NonPositiveMultiplicity {
                    side: "agent",
                    id: a.id,
                    what: "demand",
                });
            }
            agents.push(Agent {
                id: AgentId(a.id),
                demand: a.demand,
            });
        }
        let mut resources: Vec<Resource> = Vec::with_capacity(raw.resources.len());
        for r in raw.resources {
            if r.id.is_empty() {
                return Err(ValidationError::EmptyId { side: "resource" });
            }
            if r.capacity == 0 {
                return Err(ValidationError::NonPositiveMultiplicity {
                    side: "resource",
                    id: r.id,
                    what: "capacity",
                });
            }
            resources.push(Resource {
                id: ResourceId(r.id),
                capacity: r.capacity,
            });
        }
        agents.sort_by(|a, b| a.id.cmp(&b.id));
        resources.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = agents.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(ValidationError::DuplicateId {
                side: "agent",
                id: w[0].id.0.clone(),
            });
        }
        if let Some(w) = resources.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(ValidationError::DuplicateId {
                side: "resource",
                id: w[0].id.0.clone(),
            });
        }
        if agents.iter().any(|a| a.demand > 1) && resources.iter().any(|r| r.capacity > 1) {
            return Err(ValidationError::MixedDemandCapacity);
        }

        let agent_index: HashMap<&str, usize> = agents
            .iter()
            .enumerate()
            .map(|(i, a)| (a.id.0.as_str(), i))
            .collect();
        let resource_index: HashMap<&str, usize> = resources
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.0.as_str(), i))
            .collect();
        let resolve = |agent: &str, resource: &str| -> Result<Edge, ValidationError> {
            match (agent_index.get(agent), resource_index.get(resource)) {
                (Some(&a), Some(&r)) => Ok(Edge::new(a, r)),
                _ => Err(ValidationError::DanglingEdge {
                    agent: agent.to_string(),
                    resource: resource.to_string(),
                }),
            }
        };

        let mut compatible = Vec::with_capacity(raw.compatible.len());
        for (a, r) in &raw.compatible {
            compatible.push(resolve(a, r)?);
        }
        compatible.sort();
        compatible.dedup();
        let compatible_set: HashSet<Edge> = compatible.iter().copied().collect();

        let mut relaxable = Vec::with_capacity(raw.relaxable.len());
        for rx in raw.relaxable {
            let edge = resolve(&rx.agent, &rx.resource)?;
            if compatible_set.contains(&edge) {
                return Err(ValidationError::OverlappingEdgeSets {
                    agent: rx.agent,
                    resource: rx.resource,
                });
            }
            let discomfort =
                Discomfort::new(rx.discomfort).ok_or(ValidationError::NonPositiveDiscomfort {
                    agent: rx.agent.clone(),
                    resource: rx.resource.clone(),
                })?;
            relaxable.push(RelaxableEdge { edge, discomfort });
        }
        relaxable.sort_by_key(|r| r.edge);
        if let Some(w) = relaxable.windows(2).find(|w| w[0].edge == w[1].edge) {
            let e = w[0].edge;
            return Err(ValidationError::DuplicateEdge {
                agent: agents[e.agent].id.0.clone(),
                resource: resources[e.resource].id.0.clone(),
            });
        }
        Ok(Instance::from_sorted_parts(agents, resources, compatible, relaxable))
    }

    /// Assembles an instance whose parts already satisfy the invariants and
    /// whose edges are sorted by index.
    pub(crate) fn from_sorted_parts(
        agents: Vec<Agent>,
        resources: Vec<Resource>,
        compatible: Vec<Edge>,
        relaxable: Vec<RelaxableEdge>,
    ) -> Instance {
        debug_assert!(compatible.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(relaxable.windows(2).all(|w| w[0].edge < w[1].edge));
        let relaxable_lookup = relaxable
            .iter()
            .enumerate()
            .map(|(i, r)| (r.edge, i))
            .collect();
        Instance {
            agents,
            resources,
            compatible,
            relaxable,
            relaxable_lookup,
        }
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            agents: self
                .agents
                .iter()
                .map(|a| RawAgent::new(a.id.0.clone(), a.demand))
                .collect(),
            resources: self
                .resources
                .iter()
                .map(|r| RawResource::new(r.id.0.clone(), r.capacity))
                .collect(),
            compatible: self
                .compatible
                .iter()
                .map(|e| (self.agent_id(e.agent).0.clone(), self.resource_id(e.resource).0.clone()))
                .collect(),
            relaxable: self
                .relaxable
                .iter()
                .map(|r| RawRelaxable {
                    agent: self.agent_id(r.edge.agent).0.clone(),
                    resource: self.resource_id(r.edge.resource).0.clone(),
                    discomfort: r.discomfort.value().clone(),
                })
                .collect(),
        }
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn compatible(&self) -> &[Edge] {
        &self.compatible
    }

    pub fn relaxable(&self) -> &[RelaxableEdge] {
        &self.relaxable
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    pub fn agent_id(&self, agent: usize) -> &AgentId {
        &self.agents[agent].id
    }

    pub fn resource_id(&self, resource: usize) -> &ResourceId {
        &self.resources[resource].id
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents
            .binary_search_by(|a| a.id.0.as_str().cmp(id))
            .ok()
    }

    pub fn resource_index(&self, id: &str) -> Option<usize> {
        self.resources
            .binary_search_by(|r| r.id.0.as_str().cmp(id))
            .ok()
    }

    /// Position of `edge` in [`Instance::relaxable`], if it is relaxable.
    pub fn relaxable_index(&self, edge: Edge) -> Option<usize> {
        self.relaxable_lookup.get(&edge).copied()
    }

    pub fn is_compatible(&self, edge: Edge) -> bool {
        self.compatible.binary_search(&edge).is_ok()
    }

    pub fn shape(&self) -> Shape {
        if self.agents.iter().any(|a| a.demand > 1) {
            Shape::ManyToOne
        } else if self.resources.iter().any(|r| r.capacity > 1) {
            Shape::OneToMany
        } else {
            Shape::OneToOne
        }
    }

    pub fn is_one_to_one(&self) -> bool {
        self.shape() == Shape::OneToOne
    }

    /// Total demand: the number of agent slots the platform could fill.
    pub fn total_demand(&self) -> usize {
        self.agents.iter().map(|a| a.demand as usize).sum()
    }

    /// The compatible graph `(X, Y, E)`.
    pub fn compatible_graph(&self) -> BipartiteGraph {
        self.graph_with(&Relaxation::empty())
    }

    /// The graph `(X, Y, E ∪ rel)`.
    pub fn graph_with(&self, rel: &Relaxation) -> BipartiteGraph {
        let extra = rel.indices().iter().map(|&i| self.relaxable[i].edge);
        BipartiteGraph::new(
            self.agent_count(),
            self.resource_count(),
            self.compatible
                .iter()
                .copied()
                .chain(extra)
                .map(|e| (e.agent, e.resource)),
        )
    }

    /// The graph `(X, Y, E ∪ E_R)` with every relaxable pair included.
    pub fn full_graph(&self) -> BipartiteGraph {
        self.graph_with(&Relaxation::all(self))
    }
}

/// A set of relaxable pairs, stored as sorted indices into
/// [`Instance::relaxable`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Relaxation {
    indices: Vec<usize>,
}

impl Relaxation {
    pub fn empty() -> Self {
        Relaxation::default()
    }

    pub fn all(inst: &Instance) -> Self {
        Relaxation {
            indices: (0..inst.relaxable().len()).collect(),
        }
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        Relaxation {
            indices: set.into_iter().collect(),
        }
    }

    /// Builds a relaxation from `(agent id, resource id)` pairs, failing on
    /// any pair that is not relaxable in `inst`.
    pub fn from_ids<'a>(
        inst: &Instance,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Option<Self> {
        let mut out = Vec::new();
        for (a, r) in pairs {
            let edge = Edge::new(inst.agent_index(a)?, inst.resource_index(r)?);
            out.push(inst.relaxable_index(edge)?);
        }
        Some(Relaxation::from_indices(out))
    }

    /// Keeps the members selected by the bits of `mask` (bit `i` = `i`-th member).
    pub fn subset(&self, mask: u64) -> Relaxation {
        Relaxation {
            indices: self
                .indices
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .map(|(_, &i)| i)
                .collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn edges<'a>(&'a self, inst: &'a Instance) -> impl Iterator<Item = &'a RelaxableEdge> + 'a {
        self.indices.iter().map(move |&i| &inst.relaxable()[i])
    }

    /// `X(F)`: agents that take part in the relaxation.
    pub fn agents(&self, inst: &Instance) -> BTreeSet<usize> {
        self.edges(inst).map(|r| r.edge.agent).collect()
    }

    /// `(agent id, resource id)` labels, in canonical order.
    pub fn labels(&self, inst: &Instance) -> Vec<EdgeLabel> {
        self.edges(inst)
            .map(|r| EdgeLabel::of(inst, r.edge))
            .collect()
    }
}

/// Human-readable `(agent, resource)` pair used in reports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub agent: String,
    pub resource: String,
}

impl EdgeLabel {
    pub fn of(inst: &Instance, edge: Edge) -> Self {
        EdgeLabel {
            agent: inst.agent_id(edge.agent).0.clone(),
            resource: inst.resource_id(edge.resource).0.clone(),
        }
    }
}

/// How discomforts of a relaxation are combined into one cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Aggregation {
    /// Number of relaxed pairs.
    #[serde(rename = "size")]
    Size,
    /// Sum of discomforts.
    #[serde(rename = "total")]
    TotalCost,
}

impl Aggregation {
    pub const ALL: [Aggregation; 2] = [Aggregation::Size, Aggregation::TotalCost];

    /// Per-edge unit the aggregation sums.
    pub fn unit(self, discomfort: &Discomfort) -> Rational {
        match self {
            Aggregation::Size => Rational::from_integer(1.into()),
            Aggregation::TotalCost => discomfort.value().clone(),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Size => "size",
            Aggregation::TotalCost => "total",
        })
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "size" | "s" => Ok(Aggregation::Size),
            "total" | "total-cost" | "totalcost" | "t" => Ok(Aggregation::TotalCost),
            other => Err(format!("unknown aggregation {other:?} (expected size|total)")),
        }
    }
}

/// Participation guarantee combinations. Strength decreases left to right:
/// SNH-SB implies SNH-WB implies WNH-WB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Guarantee {
    #[serde(rename = "snh-sb")]
    SnhSb,
    #[serde(rename = "snh-wb")]
    SnhWb,
    #[serde(rename = "wnh-wb")]
    WnhWb,
}

impl Guarantee {
    pub const ALL: [Guarantee; 3] = [Guarantee::SnhSb, Guarantee::SnhWb, Guarantee::WnhWb];

    /// No-harm must hold for every subset of the relaxation.
    pub fn strong_no_harm(self) -> bool {
        matches!(self, Guarantee::SnhSb | Guarantee::SnhWb)
    }

    /// Benefit to relaxers must hold for every subset of the relaxation.
    pub fn strong_benefit(self) -> bool {
        matches!(self, Guarantee::SnhSb)
    }
}

impl fmt::Display for Guarantee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Guarantee::SnhSb => "snh-sb",
            Guarantee::SnhWb => "snh-wb",
            Guarantee::WnhWb => "wnh-wb",
        })
    }
}

impl FromStr for Guarantee {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "snh-sb" => Ok(Guarantee::SnhSb),
            "snh-wb" => Ok(Guarantee::SnhWb),
            "wnh-wb" => Ok(Guarantee::WnhWb),
            other => Err(format!(
                "unknown guarantee {other:?} (expected snh-sb|snh-wb|wnh-wb)"
            )),
        }
    }
}

/// Upper bound on the aggregate cost of a relaxation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite(Rational),
    Unbounded,
}

impl Bound {
    pub fn finite(value: Rational) -> Option<Bound> {
        (!value.is_negative()).then_some(Bound::Finite(value))
    }

    pub fn from_integer(value: u64) -> Bound {
        Bound::Finite(Rational::from_integer(value.into()))
    }

    pub fn zero() -> Bound {
        Bound::Finite(Rational::zero())
    }

    pub fn admits(&self, cost: &Rational) -> bool {
        match self {
            Bound::Finite(b) => cost <= b,
            Bound::Unbounded => true,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(b) => f.write_str(&format_rational(b)),
            Bound::Unbounded => f.write_str("inf"),
        }
    }
}

impl FromStr for Bound {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "unbounded" => Ok(Bound::Unbounded),
            text => {
                let v = parse_rational(text).map_err(|e| e.to_string())?;
                Bound::finite(v).ok_or_else(|| format!("bound must be nonnegative, got {text}"))
            }
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `g(F)`: aggregate cost of a relaxation.
pub fn aggregate_cost(inst: &Instance, rel: &Relaxation, agg: Aggregation) -> Rational {
    rel.edges(inst)
        .map(|r| agg.unit(&r.discomfort))
        .fold(Rational::zero(), |acc, u| acc + u)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn rat(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    /// Builds a validated one-to-one instance from short edge lists.
    pub fn instance(
        agents: &[&str],
        resources: &[&str],
        compatible: &[(&str, &str)],
        relaxable: &[(&str, &str, i64)],
    ) -> Instance {
        Instance::validate(RawInstance {
            agents: agents.iter().map(|a| RawAgent::new(*a, 1)).collect(),
            resources: resources.iter().map(|r| RawResource::new(*r, 1)).collect(),
            compatible: compatible
                .iter()
                .map(|(a, r)| (a.to_string(), r.to_string()))
                .collect(),
            relaxable: relaxable
                .iter()
                .map(|(a, r, d)| RawRelaxable {
                    agent: a.to_string(),
                    resource: r.to_string(),
                    discomfort: rat(*d),
                })
                .collect(),
        })
        .expect("fixture instance is valid")
    }

    /// X={x1,x2}, Y={y1,y2}, E={(x1,y1)}, E_R={(x1,y2):1,(x2,y1):1}.
    pub fn strictness() -> Instance {
        instance(
            &["x1", "x2"],
            &["y1", "y2"],
            &[("x1", "y1")],
            &[("x1", "y2", 1), ("x2", "y1", 1)],
        )
    }
}
