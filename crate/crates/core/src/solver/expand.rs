// SPDX-License-Identifier: Apache-2.0

//! Unit expansion for many-to-one and one-to-many instances.
//!
//! Every agent with demand `d` (or resource with capacity `c`) becomes `d`
//! (or `c`) unit copies that inherit all compatible and relaxable pairs with
//! identical discomfort. Copy `j` of `x` is named `x#j`; the separator grows
//! (`##`, `###`, ...) if that would collide with an existing id.

use std::collections::HashSet;

use crate::model::{
    Instance, RawAgent, RawInstance, RawRelaxable, RawResource, Relaxation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionSide {
    Agents,
    Resources,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub side: ExpansionSide,
    /// The one-to-one unit instance.
    pub expanded: Instance,
    /// Original index of each expanded vertex on the expanded side.
    pub origin: Vec<usize>,
    /// Original relaxable index of each expanded relaxable pair.
    pub relaxable_origin: Vec<usize>,
    /// Expanded relaxable indices of each original relaxable pair.
    pub relaxable_copies: Vec<Vec<usize>>,
}

fn separator(taken: &HashSet<&str>, ids: &[(&str, u32)]) -> String {
    let mut sep = String::from("#");
    loop {
        let clash = ids.iter().any(|&(id, n)| {
            n > 1 && (0..n).any(|j| taken.contains(format!("{id}{sep}{j}").as_str()))
        });
        if !clash {
            return sep;
        }
        sep.push('#');
    }
}

fn copy_names(id: &str, count: u32, sep: &str) -> Vec<String> {
    if count == 1 {
        vec![id.to_string()]
    } else {
        (0..count).map(|j| format!("{id}{sep}{j}")).collect()
    }
}

impl Expansion {
    pub fn new(inst: &Instance, side: ExpansionSide) -> Expansion {
        let raw = inst.to_raw();
        let (names, counts): (Vec<&str>, Vec<u32>) = match side {
            ExpansionSide::Agents => raw.agents.iter().map(|a| (a.id.as_str(), a.demand)).unzip(),
            ExpansionSide::Resources => raw
                .resources
                .iter()
                .map(|r| (r.id.as_str(), r.capacity))
                .unzip(),
        };
        let taken: HashSet<&str> = names.iter().copied().collect();
        let pairs: Vec<(&str, u32)> = names.iter().copied().zip(counts.iter().copied()).collect();
        let sep = separator(&taken, &pairs);
        let copies: Vec<Vec<String>> = pairs.iter().map(|&(id, n)| copy_names(id, n, &sep)).collect();
        let index_of = |id: &str| names.binary_search(&id).expect("id from the same instance");

        let expand_edge = |a: &str, r: &str| -> Vec<(String, String)> {
            match side {
                ExpansionSide::Agents => copies[index_of(a)].iter().map(|c| (c.clone(), r.to_string())).collect(),
                ExpansionSide::Resources => copies[index_of(r)].iter().map(|c| (a.to_string(), c.clone())).collect(),
            }
        };

        let mut expanded_raw = RawInstance::default();
        match side {
            ExpansionSide::Agents => {
                expanded_raw.agents = copies.iter().flatten().map(|c| RawAgent::new(c.clone(), 1)).collect();
                expanded_raw.resources = raw.resources.clone();
            }
            ExpansionSide::Resources => {
                expanded_raw.agents = raw.agents.clone();
                expanded_raw.resources = copies.iter().flatten().map(|c| RawResource::new(c.clone(), 1)).collect();
            }
        }
        for (a, r) in &raw.compatible {
            expanded_raw.compatible.extend(expand_edge(a, r));
        }
        for rx in &raw.relaxable {
            for (a, r) in expand_edge(&rx.agent, &rx.resource) {
                expanded_raw.relaxable.push(RawRelaxable {
                    agent: a,
                    resource: r,
                    discomfort: rx.discomfort.clone(),
                });
            }
        }
        let expanded = Instance::validate(expanded_raw).expect("expansion of a valid instance is valid");

        let mut origin = vec![0; side_count(&expanded, side)];
        for (orig, names) in copies.iter().enumerate() {
            for c in names {
                let i = match side {
                    ExpansionSide::Agents => expanded.agent_index(c),
                    ExpansionSide::Resources => expanded.resource_index(c),
                }
                .expect("copy present in expansion");
                origin[i] = orig;
            }
        }

        let mut relaxable_origin = Vec::with_capacity(expanded.relaxable().len());
        let mut relaxable_copies = vec![Vec::new(); inst.relaxable().len()];
        for (i, r) in expanded.relaxable().iter().enumerate() {
            let mut e = r.edge;
            match side {
                ExpansionSide::Agents => e.agent = origin[e.agent],
                ExpansionSide::Resources => e.resource = origin[e.resource],
            }
            let o = inst.relaxable_index(e).expect("copy of a relaxable pair");
            relaxable_origin.push(o);
            relaxable_copies[o].push(i);
        }

        Expansion {
            side,
            expanded,
            origin,
            relaxable_origin,
            relaxable_copies,
        }
    }

    /// Replaces every copy by its original.
    pub fn contract(&self, rel: &Relaxation) -> Relaxation {
        Relaxation::from_indices(rel.indices().iter().map(|&i| self.relaxable_origin[i]))
    }

    /// Every copy of every pair in `rel`.
    pub fn lift(&self, rel: &Relaxation) -> Relaxation {
        Relaxation::from_indices(self.groups(rel).iter().flat_map(|g| g.indices().to_vec()))
    }

    /// One group of copies per pair of `rel`, in `rel` order.
    pub fn groups(&self, rel: &Relaxation) -> Vec<Relaxation> {
        rel.indices()
            .iter()
            .map(|&i| Relaxation::from_indices(self.relaxable_copies[i].iter().copied()))
            .collect()
    }

    /// Original agent index of an expanded agent.
    pub fn agent_origin(&self, agent: usize) -> usize {
        match self.side {
            ExpansionSide::Agents => self.origin[agent],
            ExpansionSide::Resources => agent,
        }
    }
}

fn side_count(inst: &Instance, side: ExpansionSide) -> usize {
    match side {
        ExpansionSide::Agents => inst.agent_count(),
        ExpansionSide::Resources => inst.resource_count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::rat;

    fn raw() -> RawInstance {
        RawInstance {
            agents: vec![RawAgent::new("a", 3), RawAgent::new("b", 1), RawAgent::new("a#0", 1)],
            resources: vec![RawResource::new("p", 1), RawResource::new("q", 1)],
            compatible: vec![("a".into(), "p".into())],
            relaxable: vec![RawRelaxable {
                agent: "a".into(),
                resource: "q".into(),
                discomfort: rat(2),
            }],
        }
    }

    #[test]
    fn copies_inherit_edges() {
        let inst = Instance::validate(raw()).unwrap();
        let ex = Expansion::new(&inst, ExpansionSide::Agents);
        assert_eq!(ex.expanded.agent_count(), 5);
        assert_eq!(ex.expanded.compatible().len(), 3);
        assert_eq!(ex.expanded.relaxable().len(), 3);
        // "a#0" already exists, so copies use "##".
        assert!(ex.expanded.agent_index("a##2").is_some());
        let a = inst.agent_index("a").unwrap();
        let copies: Vec<usize> = (0..5).filter(|&i| ex.agent_origin(i) == a).collect();
        assert_eq!(copies.len(), 3);
        let all = Relaxation::all(&inst);
        assert_eq!(ex.lift(&all).len(), 3);
        assert_eq!(ex.contract(&ex.lift(&all)), all);
    }

    #[test]
    fn unit_expansion_is_identity() {
        let mut r = raw();
        r.agents[0].demand = 1;
        let inst = Instance::validate(r).unwrap();
        let ex = Expansion::new(&inst, ExpansionSide::Resources);
        assert_eq!(ex.expanded, inst);
    }
}
