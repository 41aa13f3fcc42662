// SPDX-License-Identifier: Apache-2.0

//! Bipartite matching primitives.
//!
//! Left vertices are agents, right vertices are resources, both addressed by
//! index. Everything here is deterministic: adjacency lists are sorted and
//! every scan runs in index order.

mod enumerate;
mod gamma;
mod hopcroft_karp;
mod weighted;

pub use enumerate::{enumerate_matchings, enumerate_max_matchings, gamma_bruteforce, EnumerationCapExceeded};
pub use gamma::{guaranteed_agents, guaranteed_agents_with, GuaranteedSet};
pub use hopcroft_karp::{max_cardinality_matching, maximum_matching_size};
pub use weighted::{max_weight_matching, WeightedGraph};

/// Simple bipartite graph with sorted, deduplicated adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    right: usize,
    adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); left];
        for (x, y) in edges {
            assert!(x < left && y < right, "edge ({x}, {y}) out of range");
            adj[x].push(y);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        BipartiteGraph { right, adj }
    }

    pub fn left_count(&self) -> usize {
        self.adj.len()
    }

    pub fn right_count(&self) -> usize {
        self.right
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adj[x]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.adj[x].binary_search(&y).is_ok()
    }

    /// Edges in canonical `(agent, resource)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(x, ys)| ys.iter().map(move |&y| (x, y)))
    }

    /// Same graph plus one edge.
    pub fn with_edge(&self, x: usize, y: usize) -> Self {
        BipartiteGraph::new(self.left_count(), self.right, self.edges().chain([(x, y)]))
    }

    /// Same vertex sets, with every edge of agent `x` deleted.
    pub fn without_agent_edges(&self, x: usize) -> Self {
        let mut g = self.clone();
        g.adj[x].clear();
        g
    }
}

/// A matching stored as mate arrays on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    mate_left: Vec<Option<usize>>,
    mate_right: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(left: usize, right: usize) -> Self {
        Matching {
            mate_left: vec![None; left],
            mate_right: vec![None; right],
        }
    }

    /// Builds a matching from pairs; panics if a vertex repeats.
    pub fn from_pairs(left: usize, right: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Matching::empty(left, right);
        for (x, y) in pairs {
            assert!(m.mate_left[x].is_none() && m.mate_right[y].is_none(), "not a matching");
            m.mate_left[x] = Some(y);
            m.mate_right[y] = Some(x);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.mate_left.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mate_of_agent(&self, x: usize) -> Option<usize> {
        self.mate_left[x]
    }

    pub fn mate_of_resource(&self, y: usize) -> Option<usize> {
        self.mate_right[y]
    }

    /// Pairs sorted by agent.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.mate_left
            .iter()
            .enumerate()
            .filter_map(|(x, y)| y.map(|y| (x, y)))
            .collect()
    }

    pub fn matched_agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.mate_left
            .iter()
            .enumerate()
            .filter_map(|(x, y)| y.map(|_| x))
    }

    pub(crate) fn set(&mut self, x: usize, y: usize) {
        self.mate_left[x] = Some(y);
        self.mate_right[y] = Some(x);
    }
}
