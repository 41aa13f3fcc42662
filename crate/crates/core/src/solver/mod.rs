// SPDX-License-Identifier: Apache-2.0

//! The facilitator's relaxation search.
//!
//! `k` dummy agents, each adjacent to every resource with a weight larger
//! than any real matching is worth, are added to the full graph
//! `E ∪ E_R`. The maximum-weight matching `M_k` then matches all dummies and
//! leaves at most `|Y| - k` resources to real agents. The solver picks the
//! smallest `k` whose relaxed part `M_k ∖ (E ∪ E_k)` fits the bound and
//! advises exactly that relaxed part. At `k = |Y|` the relaxed part is empty,
//! so some `k` is always feasible.

mod expand;
mod verify;
mod weights;

use std::fmt;
use std::str::FromStr;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::guarantee::GuaranteeReport;
use crate::matching::{max_weight_matching, maximum_matching_size, WeightedGraph};
use crate::model::{aggregate_cost, Aggregation, Bound, Edge, Guarantee, Instance, Relaxation, Shape};
use crate::rational::Rational;

pub use expand::{Expansion, ExpansionSide};
pub use verify::{verify_result, VerifyOptions};
pub use weights::{build_weights, WeightScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    #[default]
    Binary,
    Linear,
}

impl SearchMode {
    pub fn other(self) -> SearchMode {
        match self {
            SearchMode::Binary => SearchMode::Linear,
            SearchMode::Linear => SearchMode::Binary,
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Binary => "binary",
            SearchMode::Linear => "linear",
        })
    }
}

impl FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "binary" => Ok(SearchMode::Binary),
            "linear" => Ok(SearchMode::Linear),
            other => Err(format!("unknown search mode {other:?} (expected binary|linear)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub guarantee: Guarantee,
    pub aggregation: Aggregation,
    pub bound: Bound,
    pub search: SearchMode,
}

impl SolverConfig {
    pub fn new(guarantee: Guarantee, aggregation: Aggregation, bound: Bound) -> Self {
        SolverConfig {
            guarantee,
            aggregation,
            bound,
            search: SearchMode::Binary,
        }
    }

    pub fn with_search(mut self, search: SearchMode) -> Self {
        self.search = search;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("instance is {0:?}; use the multi-unit entry point")]
    NotOneToOne(Shape),
    #[error("edge weights overflow 128-bit integers")]
    WeightOverflow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveWarning {
    /// An agent demands more units than there are resources.
    DemandExceedsResources { agent: String, demand: u32, resources: usize },
}

impl fmt::Display for SolveWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveWarning::DemandExceedsResources {
                agent,
                demand,
                resources,
            } => write!(
                f,
                "agent {agent} demands {demand} units but only {resources} resources exist"
            ),
        }
    }
}

/// The weighted matching `M_min` at the chosen `k`. Agent indices at or
/// above `real_agents` are dummies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InternalMatching {
    pub real_agents: usize,
    pub dummies: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl InternalMatching {
    pub fn real_pairs(&self) -> impl Iterator<Item = Edge> + '_ {
        self.pairs
            .iter()
            .filter(|p| p.0 < self.real_agents)
            .map(|&(x, y)| Edge::new(x, y))
    }

    pub fn matched_dummies(&self) -> usize {
        self.pairs.iter().filter(|p| p.0 >= self.real_agents).count()
    }
}

/// One evaluation of `M_k` during the search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub k: usize,
    pub cost: Rational,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    /// `Ê`, on the caller's instance.
    pub relaxation: Relaxation,
    /// `μ(E ∪ Ê)`; for multi-unit instances the number of matched
    /// (agent unit, resource unit) pairs.
    pub allocation_size: usize,
    pub aggregate_cost: Rational,
    pub k_min: usize,
    /// On the expanded instance when one was built.
    pub internal_matching: InternalMatching,
    pub probes: Vec<Probe>,
    pub expansion: Option<Box<ExpandedSolve>>,
    pub guarantee_report: Option<GuaranteeReport>,
    pub warnings: Vec<SolveWarning>,
}

/// The one-to-one solve behind a multi-unit result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedSolve {
    pub expansion: Expansion,
    /// `Ê'` on the expanded instance.
    pub relaxation: Relaxation,
}

/// Evaluates `M_k` and its relaxed part for one `k`.
fn probe(inst: &Instance, w: &WeightScheme, cfg: &SolverConfig, k: usize) -> (Probe, Relaxation, InternalMatching) {
    let real = inst.agent_count();
    let mut g = WeightedGraph::new(real + k, inst.resource_count());
    for (e, &wt) in inst.compatible().iter().zip(&w.compatible) {
        g.add_edge(e.agent, e.resource, wt);
    }
    for (r, &wt) in inst.relaxable().iter().zip(&w.relaxable) {
        g.add_edge(r.edge.agent, r.edge.resource, wt);
    }
    for d in 0..k {
        for y in 0..inst.resource_count() {
            g.add_edge(real + d, y, w.dummy);
        }
    }
    let m = max_weight_matching(&g);
    let pairs = m.pairs();
    let relaxed = Relaxation::from_indices(
        pairs
            .iter()
            .filter(|p| p.0 < real)
            .filter_map(|&(x, y)| inst.relaxable_index(Edge::new(x, y))),
    );
    let cost = aggregate_cost(inst, &relaxed, cfg.aggregation);
    let feasible = cfg.bound.admits(&cost);
    debug!("k={k}: relaxed {} pairs, cost {cost}, feasible {feasible}", relaxed.len());
    (
        Probe { k, cost, feasible },
        relaxed,
        InternalMatching {
            real_agents: real,
            dummies: k,
            pairs,
        },
    )
}

/// Solves a one-to-one instance.
pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    let shape = inst.shape();
    if shape != Shape::OneToOne {
        return Err(SolveError::NotOneToOne(shape));
    }
    let w = build_weights(inst, cfg.guarantee, cfg.aggregation)?;
    let top = inst.resource_count();
    let mut probes = Vec::new();
    let mut best: Option<(usize, Relaxation, InternalMatching)> = None;

    match cfg.search {
        SearchMode::Binary => {
            let (mut low, mut high) = (0i64, top as i64);
            while low <= high {
                let k = ((low + high) / 2) as usize;
                let (p, rel, m) = probe(inst, &w, cfg, k);
                let feasible = p.feasible;
                probes.push(p);
                if feasible {
                    best = Some((k, rel, m));
                    high = k as i64 - 1;
                } else {
                    low = k as i64 + 1;
                }
            }
        }
        SearchMode::Linear => {
            for k in 0..=top {
                let (p, rel, m) = probe(inst, &w, cfg, k);
                let feasible = p.feasible;
                probes.push(p);
                if feasible {
                    best = Some((k, rel, m));
                    break;
                }
            }
        }
    }

    let (k_min, relaxation, internal_matching) =
        best.expect("k = |Y| leaves no resource to relaxed pairs, so it is always feasible");
    let allocation_size = maximum_matching_size(&inst.graph_with(&relaxation));
    let aggregate_cost = aggregate_cost(inst, &relaxation, cfg.aggregation);
    Ok(SolveResult {
        relaxation,
        allocation_size,
        aggregate_cost,
        k_min,
        internal_matching,
        probes,
        expansion: None,
        guarantee_report: None,
        warnings: Vec::new(),
    })
}

/// Solves by duplicating every agent `d(x)` times, then contracting copies.
pub fn solve_many_to_one(inst: &Instance, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    solve_expanded(inst, cfg, ExpansionSide::Agents)
}

/// Solves by duplicating every resource `c(y)` times, then contracting copies.
pub fn solve_one_to_many(inst: &Instance, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    solve_expanded(inst, cfg, ExpansionSide::Resources)
}

/// Dispatches on the instance shape.
pub fn solve_allocation(inst: &Instance, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    match inst.shape() {
        Shape::OneToOne => solve(inst, cfg),
        Shape::ManyToOne => solve_many_to_one(inst, cfg),
        Shape::OneToMany => solve_one_to_many(inst, cfg),
    }
}

fn solve_expanded(inst: &Instance, cfg: &SolverConfig, side: ExpansionSide) -> Result<SolveResult, SolveError> {
    let mut warnings = Vec::new();
    if side == ExpansionSide::Agents {
        for a in inst.agents() {
            if a.demand as usize > inst.resource_count() {
                warnings.push(SolveWarning::DemandExceedsResources {
                    agent: a.id.0.clone(),
                    demand: a.demand,
                    resources: inst.resource_count(),
                });
            }
        }
    }
    let expansion = Expansion::new(inst, side);
    let inner = solve(&expansion.expanded, cfg)?;
    let relaxation = expansion.contract(&inner.relaxation);
    let allocation_size = maximum_matching_size(&expansion.expanded.graph_with(&expansion.lift(&relaxation)));
    let aggregate_cost = aggregate_cost(inst, &relaxation, cfg.aggregation);
    Ok(SolveResult {
        relaxation,
        allocation_size,
        aggregate_cost,
        k_min: inner.k_min,
        internal_matching: inner.internal_matching,
        probes: inner.probes,
        expansion: Some(Box::new(ExpandedSolve {
            expansion,
            relaxation: inner.relaxation,
        })),
        guarantee_report: None,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{instance, rat, strictness};
    use crate::model::{RawAgent, RawInstance, RawRelaxable, RawResource};

    fn cfg(g: Guarantee, agg: Aggregation, bound: i64) -> SolverConfig {
        SolverConfig::new(g, agg, Bound::Finite(rat(bound)))
    }

    fn labels(inst: &Instance, r: &SolveResult) -> Vec<(String, String)> {
        r.relaxation
            .labels(inst)
            .into_iter()
            .map(|l| (l.agent, l.resource))
            .collect()
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn already_matched_needs_nothing() {
        let inst = instance(&["x1"], &["y1"], &[("x1", "y1")], &[]);
        for g in Guarantee::ALL {
            let r = solve(&inst, &SolverConfig::new(g, Aggregation::Size, Bound::Unbounded)).unwrap();
            assert!(r.relaxation.is_empty());
            assert_eq!(r.allocation_size, 1);
        }
    }

    #[test]
    fn single_relaxable_pair() {
        let inst = instance(&["x1"], &["y1"], &[], &[("x1", "y1", 2)]);
        let r = solve(&inst, &cfg(Guarantee::SnhSb, Aggregation::TotalCost, 5)).unwrap();
        assert_eq!(labels(&inst, &r), vec![pair("x1", "y1")]);
        assert_eq!((r.allocation_size, r.aggregate_cost.clone(), r.k_min), (1, rat(2), 0));
    }

    #[test]
    fn strictness_instance() {
        let inst = strictness();
        let ww = solve(&inst, &cfg(Guarantee::WnhWb, Aggregation::TotalCost, 10)).unwrap();
        assert_eq!(labels(&inst, &ww), vec![pair("x1", "y2"), pair("x2", "y1")]);
        assert_eq!(ww.allocation_size, 2);
        let ss = solve(&inst, &cfg(Guarantee::SnhSb, Aggregation::TotalCost, 10)).unwrap();
        assert!(ss.relaxation.is_empty());
        assert_eq!(ss.allocation_size, 1);
        // Literal SNH-WB weights: x1 is in Γ(E), so only (x2,y1) is usable.
        let sw = solve(&inst, &cfg(Guarantee::SnhWb, Aggregation::TotalCost, 10)).unwrap();
        assert_eq!(labels(&inst, &sw), vec![pair("x2", "y1")]);
        assert_eq!(sw.k_min, 0);
    }

    #[test]
    fn zero_bound_under_size_relaxes_nothing() {
        let inst = strictness();
        for g in Guarantee::ALL {
            for mode in [SearchMode::Binary, SearchMode::Linear] {
                let r = solve(&inst, &cfg(g, Aggregation::Size, 0).with_search(mode)).unwrap();
                assert!(r.relaxation.is_empty());
            }
        }
    }

    #[test]
    fn bound_throttles_relaxation() {
        // Two independent relaxable pairs, bound admits only one.
        let inst = instance(&["a", "b"], &["p", "q"], &[], &[("a", "p", 1), ("b", "q", 3)]);
        let r = solve(&inst, &cfg(Guarantee::WnhWb, Aggregation::TotalCost, 2)).unwrap();
        assert_eq!(labels(&inst, &r), vec![pair("a", "p")]);
        assert_eq!(r.k_min, 1);
        assert_eq!(r.internal_matching.matched_dummies(), 1);
    }

    #[test]
    fn rejects_multi_unit_instance() {
        let inst = Instance::validate(RawInstance {
            agents: vec![RawAgent::new("x", 2)],
            resources: vec![RawResource::new("y", 1)],
            compatible: vec![("x".into(), "y".into())],
            relaxable: vec![],
        })
        .unwrap();
        let c = cfg(Guarantee::SnhSb, Aggregation::Size, 1);
        assert_eq!(solve(&inst, &c), Err(SolveError::NotOneToOne(Shape::ManyToOne)));
    }

    fn many_to_one_example() -> Instance {
        Instance::validate(RawInstance {
            agents: vec![RawAgent::new("x", 2)],
            resources: vec![RawResource::new("y1", 1), RawResource::new("y2", 1)],
            compatible: vec![("x".into(), "y1".into())],
            relaxable: vec![RawRelaxable {
                agent: "x".into(),
                resource: "y2".into(),
                discomfort: rat(1),
            }],
        })
        .unwrap()
    }

    #[test]
    fn many_to_one_duplicates_agent() {
        let inst = many_to_one_example();
        let r = solve_many_to_one(&inst, &cfg(Guarantee::SnhSb, Aggregation::TotalCost, 1)).unwrap();
        assert_eq!(labels(&inst, &r), vec![pair("x", "y2")]);
        assert_eq!(r.allocation_size, 2);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn many_to_one_demand_above_resources() {
        let inst = Instance::validate(RawInstance {
            agents: vec![RawAgent::new("x", 2)],
            resources: vec![RawResource::new("y1", 1)],
            compatible: vec![("x".into(), "y1".into())],
            relaxable: vec![],
        })
        .unwrap();
        let r = solve_allocation(&inst, &cfg(Guarantee::SnhSb, Aggregation::Size, 3)).unwrap();
        assert!(r.relaxation.is_empty());
        assert_eq!(r.allocation_size, 1);
        assert_eq!(r.warnings.len(), 1);
    }

    fn one_to_many(compatible: &[(&str, &str)], relaxable: &[(&str, &str, i64)]) -> Instance {
        Instance::validate(RawInstance {
            agents: vec![RawAgent::new("x1", 1), RawAgent::new("x2", 1)],
            resources: vec![RawResource::new("y", 2)],
            compatible: compatible.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            relaxable: relaxable
                .iter()
                .map(|(a, b, d)| RawRelaxable {
                    agent: a.to_string(),
                    resource: b.to_string(),
                    discomfort: rat(*d),
                })
                .collect(),
        })
        .unwrap()
    }

    #[test]
    fn one_to_many_duplicates_resource() {
        let inst = one_to_many(&[("x1", "y")], &[("x2", "y", 1)]);
        let r = solve_one_to_many(&inst, &cfg(Guarantee::SnhSb, Aggregation::TotalCost, 1)).unwrap();
        assert_eq!(labels(&inst, &r), vec![pair("x2", "y")]);
        assert_eq!(r.allocation_size, 2);

        let inst = one_to_many(&[("x1", "y"), ("x2", "y")], &[]);
        let r = solve_allocation(&inst, &cfg(Guarantee::SnhSb, Aggregation::Size, 5)).unwrap();
        assert!(r.relaxation.is_empty());
        assert_eq!(r.allocation_size, 2);
    }

    #[test]
    fn unit_multiplicities_match_plain_solve() {
        let inst = strictness();
        for g in Guarantee::ALL {
            let c = cfg(g, Aggregation::TotalCost, 10);
            let plain = solve(&inst, &c).unwrap();
            for side in [solve_many_to_one(&inst, &c).unwrap(), solve_one_to_many(&inst, &c).unwrap()] {
                assert_eq!(side.relaxation, plain.relaxation);
                assert_eq!(side.allocation_size, plain.allocation_size);
            }
        }
    }

    mod props {
        use super::*;
        use crate::model::{RawAgent, RawInstance, RawRelaxable, RawResource};
        use proptest::prelude::*;

        /// 0 compatible, 1 relaxable with discomfort `d`, 2 absent.
        fn arb_instance() -> impl Strategy<Value = Instance> {
            (1usize..=4, 1usize..=4).prop_flat_map(|(nx, ny)| {
                proptest::collection::vec((0u8..3, 1i64..=5), nx * ny).prop_map(move |cells| {
                    let mut raw = RawInstance {
                        agents: (0..nx).map(|i| RawAgent::new(format!("x{i}"), 1)).collect(),
                        resources: (0..ny).map(|j| RawResource::new(format!("y{j}"), 1)).collect(),
                        ..RawInstance::default()
                    };
                    for (k, &(kind, d)) in cells.iter().enumerate() {
                        let (a, r) = (format!("x{}", k / ny), format!("y{}", k % ny));
                        match kind {
                            0 => raw.compatible.push((a, r)),
                            1 => raw.relaxable.push(RawRelaxable {
                                agent: a,
                                resource: r,
                                discomfort: rat(d),
                            }),
                            _ => {}
                        }
                    }
                    Instance::validate(raw).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn searches_agree_and_respect_bound(inst in arb_instance(), b in 0i64..8, total in any::<bool>()) {
                let agg = if total { Aggregation::TotalCost } else { Aggregation::Size };
                for g in Guarantee::ALL {
                    let c = cfg(g, agg, b);
                    let bin = solve(&inst, &c).unwrap();
                    let lin = solve(&inst, &c.clone().with_search(SearchMode::Linear)).unwrap();
                    prop_assert_eq!(&bin.relaxation, &lin.relaxation);
                    prop_assert!(c.bound.admits(&bin.aggregate_cost));
                }
            }

            #[test]
            fn larger_bound_never_matches_fewer(inst in arb_instance(), b in 0i64..6) {
                for g in [Guarantee::SnhSb, Guarantee::WnhWb] {
                    let low = solve(&inst, &cfg(g, Aggregation::TotalCost, b)).unwrap();
                    let high = solve(&inst, &cfg(g, Aggregation::TotalCost, b + 1)).unwrap();
                    prop_assert!(low.allocation_size <= high.allocation_size);
                }
            }

            #[test]
            fn weak_guarantee_matches_at_least_strong(inst in arb_instance(), b in 0i64..8) {
                let sb = solve(&inst, &cfg(Guarantee::SnhSb, Aggregation::TotalCost, b)).unwrap();
                let wb = solve(&inst, &cfg(Guarantee::WnhWb, Aggregation::TotalCost, b)).unwrap();
                prop_assert!(sb.allocation_size <= wb.allocation_size);
            }
        }
    }
}
