// SPDX-License-Identifier: Apache-2.0

//! Γ(F): agents that appear in every maximum matching.
//!
//! Take any maximum matching M and orient non-matching edges agent→resource
//! and matching edges resource→agent. An agent is missed by some maximum
//! matching iff it is free in M or reachable from a free agent along that
//! orientation (the reverse of an even alternating path ending at a free
//! agent). Everything else is guaranteed.

use std::collections::{BTreeSet, VecDeque};

use super::{max_cardinality_matching, BipartiteGraph, Matching};

/// Agents present in all maximum matchings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GuaranteedSet(BTreeSet<usize>);

impl GuaranteedSet {
    pub fn from_agents(agents: impl IntoIterator<Item = usize>) -> Self {
        GuaranteedSet(agents.into_iter().collect())
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.0.contains(&agent)
    }

    pub fn is_subset(&self, other: &GuaranteedSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Members of `self` missing from `other`.
    pub fn missing_from(&self, other: &GuaranteedSet) -> Vec<usize> {
        self.0.difference(&other.0).copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Γ of `g` via alternating reachability from free agents.
pub fn guaranteed_agents(g: &BipartiteGraph) -> GuaranteedSet {
    let m = max_cardinality_matching(g);
    guaranteed_agents_with(g, &m)
}

/// Same as [`guaranteed_agents`] given a maximum matching `m` of `g`.
pub fn guaranteed_agents_with(g: &BipartiteGraph, m: &Matching) -> GuaranteedSet {
    let left = g.left_count();
    let mut avoidable = vec![false; left];
    let mut queue: VecDeque<usize> = (0..left).filter(|&x| m.mate_of_agent(x).is_none()).collect();
    for &x in &queue {
        avoidable[x] = true;
    }
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x) {
            if m.mate_of_agent(x) == Some(y) {
                continue;
            }
            let x2 = m
                .mate_of_resource(y)
                .expect("a free resource next to a reachable agent means M was not maximum");
            if !avoidable[x2] {
                avoidable[x2] = true;
                queue.push_back(x2);
            }
        }
    }
    GuaranteedSet((0..left).filter(|&x| !avoidable[x]).collect())
}
