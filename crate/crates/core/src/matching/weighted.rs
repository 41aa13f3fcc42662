// SPDX-License-Identifier: Apache-2.0

//! Maximum-weight bipartite matching over exact integer weights.
//!
//! The optimum ranges over all matchings, not only perfect or
//! maximum-cardinality ones. A matching that contains an edge of weight
//! `<= 0` is never worse after dropping it, so only positive edges enter the
//! solver. The remaining problem is a rectangular assignment problem solved
//! with the shortest-augmenting-path Hungarian method in O(n²·m), where
//! `n <= m` are the two side sizes; an unassigned row is modelled by a
//! zero-cost non-edge cell.

use super::Matching;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightedGraph {
    pub left: usize,
    pub right: usize,
    pub edges: Vec<(usize, usize, i128)>,
}

impl WeightedGraph {
    pub fn new(left: usize, right: usize) -> Self {
        WeightedGraph {
            left,
            right,
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, x: usize, y: usize, w: i128) {
        debug_assert!(x < self.left && y < self.right);
        self.edges.push((x, y, w));
    }

    /// Total weight of `m` under this graph's weights (missing edges count 0).
    pub fn weight_of(&self, m: &Matching) -> i128 {
        self.edges
            .iter()
            .filter(|&&(x, y, _)| m.mate_of_agent(x) == Some(y))
            .map(|&(_, _, w)| w)
            .sum()
    }
}

pub fn max_weight_matching(g: &WeightedGraph) -> Matching {
    let transpose = g.left > g.right;
    let (rows, cols) = if transpose {
        (g.right, g.left)
    } else {
        (g.left, g.right)
    };
    let mut result = Matching::empty(g.left, g.right);
    if rows == 0 || !g.edges.iter().any(|e| e.2 > 0) {
        return result;
    }

    // cost[r][c] = -w for positive edges, 0 elsewhere.
    let mut cost = vec![0i128; rows * cols];
    let mut positive = vec![false; rows * cols];
    for &(x, y, w) in &g.edges {
        if w <= 0 {
            continue;
        }
        let (r, c) = if transpose { (y, x) } else { (x, y) };
        let cell = r * cols + c;
        if !positive[cell] || -w < cost[cell] {
            cost[cell] = -w;
            positive[cell] = true;
        }
    }

    let assignment = hungarian(rows, cols, &cost);
    for (r, c) in assignment.into_iter().enumerate() {
        if positive[r * cols + c] {
            let (x, y) = if transpose { (c, r) } else { (r, c) };
            result.set(x, y);
        }
    }
    result
}

/// Minimum-cost assignment of every row to a distinct column (`rows <= cols`).
/// Returns the column of each row.
fn hungarian(rows: usize, cols: usize, cost: &[i128]) -> Vec<usize> {
    debug_assert!(rows <= cols);
    const INF: i128 = i128::MAX / 4;
    // 1-indexed potentials; column 0 is the virtual root.
    let mut u = vec![0i128; rows + 1];
    let mut v = vec![0i128; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    let mut minv = vec![INF; cols + 1];
    let mut used = vec![false; cols + 1];

    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.fill(INF);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = &cost[(i0 - 1) * cols..i0 * cols];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; rows];
    for j in 1..=cols {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}
