// SPDX-License-Identifier: Apache-2.0

//! Brute-force ground truth for small one-to-one instances.
//!
//! Every subset of the relaxable pairs is a candidate. For each one the
//! oracle computes `μ` and `Γ`, evaluates no-harm and benefit, and folds the
//! strong variants over submasks: a subset is strongly no-harm iff it is
//! no-harm and every subset one pair smaller is strongly no-harm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matching::{gamma_bruteforce, guaranteed_agents, maximum_matching_size, BipartiteGraph, GuaranteedSet};
use crate::model::{aggregate_cost, Guarantee, Instance, Relaxation, Shape};
use crate::rational::Rational;
use crate::solver::SolverConfig;

pub use crate::matching::{enumerate_max_matchings, EnumerationCapExceeded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaMethod {
    /// Alternating-path reachability.
    #[default]
    Fast,
    /// Intersection over every enumerated maximum matching.
    Enumeration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_relaxable: usize,
    pub max_vertices: usize,
    pub gamma: GammaMethod,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_relaxable: 12,
            max_vertices: 16,
            gamma: GammaMethod::Fast,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{relaxable} relaxable pairs exceed the oracle cap of {cap}")]
    TooManyRelaxable { relaxable: usize, cap: usize },
    #[error("{vertices} vertices exceed the oracle cap of {cap}")]
    TooManyVertices { vertices: usize, cap: usize },
    #[error("the oracle needs a one-to-one instance, got {0:?}")]
    NotOneToOne(Shape),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub best_mu: usize,
    /// Every optimum of minimal aggregate cost, in canonical order.
    pub best_relaxations: Vec<Relaxation>,
    pub best_cost: Rational,
    pub checked_count: usize,
}

/// Per-subset facts the guarantee predicates are built from.
#[derive(Debug, Clone)]
struct SubsetFacts {
    mu: usize,
    no_harm: bool,
    benefit: bool,
}

fn gamma_of(g: &BipartiteGraph, method: GammaMethod, cap: usize) -> GuaranteedSet {
    match method {
        GammaMethod::Fast => guaranteed_agents(g),
        GammaMethod::Enumeration => gamma_bruteforce(g, cap).expect("vertex cap checked up front"),
    }
}

/// Which subsets of the relaxable pairs satisfy `g`, indexed by bitmask.
pub fn satisfying_masks(inst: &Instance, g: Guarantee, caps: &OracleCaps) -> Result<Vec<bool>, OracleError> {
    Ok(analyse(inst, caps)?.into_iter().map(|(facts, strong)| strong.satisfies(&facts, g)).collect())
}

#[derive(Debug, Clone, Copy)]
struct Strong {
    no_harm: bool,
    benefit: bool,
}

impl Strong {
    fn satisfies(&self, f: &SubsetFacts, g: Guarantee) -> bool {
        match g {
            Guarantee::SnhSb => self.no_harm && self.benefit,
            Guarantee::SnhWb => self.no_harm && f.benefit,
            Guarantee::WnhWb => f.no_harm && f.benefit,
        }
    }
}

fn check_caps(inst: &Instance, caps: &OracleCaps) -> Result<(), OracleError> {
    let shape = inst.shape();
    if shape != Shape::OneToOne {
        return Err(OracleError::NotOneToOne(shape));
    }
    let n = inst.relaxable().len();
    if n > caps.max_relaxable.min(30) {
        return Err(OracleError::TooManyRelaxable {
            relaxable: n,
            cap: caps.max_relaxable.min(30),
        });
    }
    let vertices = inst.agent_count() + inst.resource_count();
    if vertices > caps.max_vertices {
        return Err(OracleError::TooManyVertices {
            vertices,
            cap: caps.max_vertices,
        });
    }
    Ok(())
}

fn analyse(inst: &Instance, caps: &OracleCaps) -> Result<Vec<(SubsetFacts, Strong)>, OracleError> {
    check_caps(inst, caps)?;
    let n = inst.relaxable().len();
    let all = Relaxation::all(inst);
    let base = gamma_of(&inst.compatible_graph(), caps.gamma, caps.max_vertices);

    let facts: Vec<SubsetFacts> = (0..1u64 << n)
        .into_par_iter()
        .map(|mask| {
            let rel = all.subset(mask);
            let graph = inst.graph_with(&rel);
            let gamma = gamma_of(&graph, caps.gamma, caps.max_vertices);
            SubsetFacts {
                mu: maximum_matching_size(&graph),
                no_harm: base.is_subset(&gamma),
                benefit: rel.agents(inst).into_iter().all(|x| gamma.contains(x)),
            }
        })
        .collect();

    // Masks are visited in increasing order, so every submask is done first.
    let mut strong: Vec<Strong> = Vec::with_capacity(facts.len());
    for (mask, f) in facts.iter().enumerate() {
        let mut s = Strong {
            no_harm: f.no_harm,
            benefit: f.benefit,
        };
        for bit in 0..n {
            if mask >> bit & 1 == 1 {
                let sub = strong[mask ^ (1 << bit)];
                s.no_harm &= sub.no_harm;
                s.benefit &= sub.benefit;
            }
        }
        strong.push(s);
    }
    Ok(facts.into_iter().zip(strong).collect())
}

/// The optimum of the facilitator's problem by exhaustive search.
pub fn brute_force_optimum(inst: &Instance, cfg: &SolverConfig, caps: &OracleCaps) -> Result<OracleVerdict, OracleError> {
    let table = analyse(inst, caps)?;
    let all = Relaxation::all(inst);
    let mut best_mu = 0;
    let mut best: Vec<(Rational, Relaxation)> = Vec::new();
    for (mask, (facts, strong)) in table.iter().enumerate() {
        if !strong.satisfies(facts, cfg.guarantee) {
            continue;
        }
        let rel = all.subset(mask as u64);
        let cost = aggregate_cost(inst, &rel, cfg.aggregation);
        if !cfg.bound.admits(&cost) {
            continue;
        }
        if facts.mu > best_mu {
            best_mu = facts.mu;
            best.clear();
        }
        if facts.mu == best_mu {
            best.push((cost, rel));
        }
    }
    let best_cost = best
        .iter()
        .map(|(c, _)| c.clone())
        .min()
        .expect("the empty relaxation is always admissible");
    let mut best_relaxations: Vec<Relaxation> = best
        .into_iter()
        .filter(|(c, _)| *c == best_cost)
        .map(|(_, r)| r)
        .collect();
    best_relaxations.sort();
    Ok(OracleVerdict {
        best_mu,
        best_relaxations,
        best_cost,
        checked_count: table.len(),
    })
}
