// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;

use super::{BipartiteGraph, Matching};

const INF: usize = usize::MAX;

/// Maximum-cardinality matching (Hopcroft–Karp, O(E·√V)).
pub fn max_cardinality_matching(g: &BipartiteGraph) -> Matching {
    let left = g.left_count();
    let mut m = Matching::empty(left, g.right_count());
    let mut dist = vec![INF; left];
    let mut queue = VecDeque::with_capacity(left);

    loop {
        // Layer free agents and everything reachable by alternating paths.
        queue.clear();
        for x in 0..left {
            if m.mate_of_agent(x).is_none() {
                dist[x] = 0;
                queue.push_back(x);
            } else {
                dist[x] = INF;
            }
        }
        let mut found = false;
        while let Some(x) = queue.pop_front() {
            for &y in g.neighbors(x) {
                match m.mate_of_resource(y) {
                    None => found = true,
                    Some(x2) if dist[x2] == INF => {
                        dist[x2] = dist[x] + 1;
                        queue.push_back(x2);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }

        let mut next = vec![0usize; left];
        for x in 0..left {
            if m.mate_of_agent(x).is_none() {
                augment(g, &mut m, &mut dist, &mut next, x);
            }
        }
    }
    m
}

/// Iterative DFS along the BFS layering; returns whether `root` was augmented.
fn augment(
    g: &BipartiteGraph,
    m: &mut Matching,
    dist: &mut [usize],
    next: &mut [usize],
    root: usize,
) -> bool {
    let mut agents = vec![root];
    let mut via: Vec<usize> = Vec::new();
    while let Some(&x) = agents.last() {
        let nbrs = g.neighbors(x);
        let mut advanced = false;
        while next[x] < nbrs.len() {
            let y = nbrs[next[x]];
            next[x] += 1;
            match m.mate_of_resource(y) {
                None => {
                    via.push(y);
                    for (&a, &b) in agents.iter().zip(&via) {
                        m.set(a, b);
                    }
                    return true;
                }
                Some(x2) if dist[x2] == dist[x] + 1 => {
                    via.push(y);
                    agents.push(x2);
                    advanced = true;
                    break;
                }
                Some(_) => {}
            }
        }
        if !advanced {
            dist[x] = INF;
            agents.pop();
            via.pop();
        }
    }
    false
}

/// μ(F): size of a maximum matching.
pub fn maximum_matching_size(g: &BipartiteGraph) -> usize {
    max_cardinality_matching(g).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph() {
        let g = BipartiteGraph::new(2, 2, []);
        assert!(max_cardinality_matching(&g).is_empty());
    }

    #[test]
    fn shared_resource() {
        let g = BipartiteGraph::new(2, 1, [(0, 0), (1, 0)]);
        assert_eq!(maximum_matching_size(&g), 1);
    }

    #[test]
    fn forced_perfect_matching() {
        // Enumeration: {x1y1,x2y2} is the only size-2 matching.
        let g = BipartiteGraph::new(2, 2, [(0, 0), (1, 0), (1, 1)]);
        assert_eq!(max_cardinality_matching(&g).pairs(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn long_augmenting_path() {
        // A chain that forces repeated re-routing.
        let n = 50;
        let edges = (0..n).flat_map(|i| {
            let mut v = vec![(i, i)];
            if i + 1 < n {
                v.push((i + 1, i));
            }
            v
        });
        let g = BipartiteGraph::new(n, n, edges);
        assert_eq!(maximum_matching_size(&g), n);
    }
}
