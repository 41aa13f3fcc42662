// SPDX-License-Identifier: Apache-2.0

//! Exhaustive matching enumeration for small graphs. These are oracles:
//! they never use augmenting paths, only the definitions.

use super::{BipartiteGraph, GuaranteedSet, Matching};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("graph has {vertices} vertices; enumeration is capped at {cap}")]
pub struct EnumerationCapExceeded {
    pub vertices: usize,
    pub cap: usize,
}

fn check_cap(g: &BipartiteGraph, cap: usize) -> Result<(), EnumerationCapExceeded> {
    let vertices = g.left_count() + g.right_count();
    if vertices > cap {
        Err(EnumerationCapExceeded { vertices, cap })
    } else {
        Ok(())
    }
}

/// Calls `visit` once for every matching of `g` (including the empty one),
/// with pairs listed by agent.
pub fn enumerate_matchings(g: &BipartiteGraph, mut visit: impl FnMut(&[(usize, usize)])) {
    let mut used = vec![false; g.right_count()];
    let mut current = Vec::new();
    recurse(g, 0, &mut used, &mut current, &mut visit);
}

fn recurse(
    g: &BipartiteGraph,
    x: usize,
    used: &mut [bool],
    current: &mut Vec<(usize, usize)>,
    visit: &mut impl FnMut(&[(usize, usize)]),
) {
    if x == g.left_count() {
        visit(current);
        return;
    }
    recurse(g, x + 1, used, current, visit);
    for &y in g.neighbors(x) {
        if !used[y] {
            used[y] = true;
            current.push((x, y));
            recurse(g, x + 1, used, current, visit);
            current.pop();
            used[y] = false;
        }
    }
}

/// Every maximum-cardinality matching, sorted by their pair lists.
pub fn enumerate_max_matchings(
    g: &BipartiteGraph,
    cap: usize,
) -> Result<Vec<Matching>, EnumerationCapExceeded> {
    check_cap(g, cap)?;
    let mut best = 0;
    let mut all: Vec<Vec<(usize, usize)>> = Vec::new();
    enumerate_matchings(g, |pairs| {
        if pairs.len() > best {
            best = pairs.len();
            all.clear();
        }
        if pairs.len() == best {
            all.push(pairs.to_vec());
        }
    });
    all.sort();
    Ok(all
        .into_iter()
        .map(|p| Matching::from_pairs(g.left_count(), g.right_count(), p))
        .collect())
}

/// Γ by definition: intersect matched-agent sets over all maximum matchings.
pub fn gamma_bruteforce(g: &BipartiteGraph, cap: usize) -> Result<GuaranteedSet, EnumerationCapExceeded> {
    check_cap(g, cap)?;
    let left = g.left_count();
    let mut best = 0;
    let mut always = vec![true; left];
    enumerate_matchings(g, |pairs| {
        if pairs.len() < best {
            return;
        }
        let mut here = vec![false; left];
        for &(x, _) in pairs {
            here[x] = true;
        }
        if pairs.len() > best {
            best = pairs.len();
            always = here;
        } else {
            for (a, h) in always.iter_mut().zip(here) {
                *a &= h;
            }
        }
    });
    Ok(GuaranteedSet::from_agents((0..left).filter(|&x| always[x])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = BipartiteGraph::new(1, 1, [(0, 0)]);
        let all = enumerate_max_matchings(&g, 16).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].pairs(), vec![(0, 0)]);
    }

    #[test]
    fn disjoint_alternatives() {
        let g = BipartiteGraph::new(2, 1, [(0, 0), (1, 0)]);
        let all = enumerate_max_matchings(&g, 16).unwrap();
        assert_eq!(all.len(), 2);
        assert!(all.iter().all(|m| m.len() == 1));
    }

    #[test]
    fn complete_two_by_two() {
        let g = BipartiteGraph::new(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]);
        let all = enumerate_max_matchings(&g, 16).unwrap();
        let pairs: Vec<_> = all.iter().map(Matching::pairs).collect();
        assert_eq!(pairs, vec![vec![(0, 0), (1, 1)], vec![(0, 1), (1, 0)]]);
    }

    #[test]
    fn gamma_examples() {
        let g = BipartiteGraph::new(1, 1, []);
        assert!(gamma_bruteforce(&g, 16).unwrap().is_empty());
        let g = BipartiteGraph::new(2, 1, [(0, 0), (1, 0)]);
        assert!(gamma_bruteforce(&g, 16).unwrap().is_empty());
        let g = BipartiteGraph::new(2, 2, [(0, 0), (1, 0), (1, 1)]);
        assert_eq!(gamma_bruteforce(&g, 16).unwrap(), GuaranteedSet::from_agents([0, 1]));
    }

    #[test]
    fn cap_is_an_error() {
        let g = BipartiteGraph::new(9, 8, []);
        assert_eq!(
            gamma_bruteforce(&g, 16),
            Err(EnumerationCapExceeded { vertices: 17, cap: 16 })
        );
    }
}
