// SPDX-License-Identifier: Apache-2.0

//! Participation-guarantee predicates, checked literally.
//!
//! * no harm: `Γ(E) ⊆ Γ(E ∪ F)`
//! * benefit to relaxers: `X(F) ⊆ Γ(E ∪ F)`
//!
//! The strong variants quantify over every subset `F` of the relaxation, the
//! weak ones only over the full relaxation. Subset enumeration is capped and
//! exceeding the cap is an error, never a sampled approximation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::matching::{guaranteed_agents, GuaranteedSet};
use crate::model::{EdgeLabel, Guarantee, Instance, Relaxation};

pub const DEFAULT_SUBSET_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("relaxation has {size} edges; subset checks are capped at {cap}")]
pub struct SubsetCapExceeded {
    pub size: usize,
    pub cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NoHarm,
    Benefit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// The subset of the relaxation that was applied.
    pub subset: Vec<EdgeLabel>,
    /// Agents that should be guaranteed but are not.
    pub unguaranteed: Vec<String>,
}

/// Solver outcome compared with the brute-force optimum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalityCheck {
    pub solver_allocation_size: usize,
    pub solver_cost: String,
    pub oracle_best_allocation_size: usize,
    pub oracle_min_cost: String,
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuaranteeReport {
    pub guarantee: Guarantee,
    pub passed: bool,
    pub subsets_checked: usize,
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimality: Option<OptimalityCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_consistent: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl GuaranteeReport {
    pub fn violations_of(&self, kind: ViolationKind) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.kind == kind)
    }
}

/// Checks `rel` against guarantee `g`, listing every violating subset.
pub fn check_guarantee(
    inst: &Instance,
    rel: &Relaxation,
    g: Guarantee,
    subset_cap: usize,
) -> Result<GuaranteeReport, SubsetCapExceeded> {
    AuditTarget::singletons(inst, rel).check(g, subset_cap)
}

/// Runs only the full-set part of `g` (the weak checks). Used when a strong
/// check would exceed the subset cap.
pub fn check_full_set_only(inst: &Instance, rel: &Relaxation, g: Guarantee) -> GuaranteeReport {
    AuditTarget::singletons(inst, rel).audit(g, false)
}

/// A relaxation split into groups that are applied or withheld together.
///
/// For expanded multi-unit instances each group holds every copy of one
/// original pair, and agent copies report under their original id.
pub(crate) struct AuditTarget<'a> {
    pub inst: &'a Instance,
    pub groups: Vec<Relaxation>,
    pub labels: Vec<EdgeLabel>,
    pub agent_names: Vec<String>,
}

impl<'a> AuditTarget<'a> {
    pub fn singletons(inst: &'a Instance, rel: &Relaxation) -> Self {
        AuditTarget {
            inst,
            groups: rel.indices().iter().map(|&i| Relaxation::from_indices([i])).collect(),
            labels: rel.labels(inst),
            agent_names: inst.agents().iter().map(|a| a.id.0.clone()).collect(),
        }
    }

    pub fn check(&self, g: Guarantee, subset_cap: usize) -> Result<GuaranteeReport, SubsetCapExceeded> {
        let strong = g.strong_no_harm() || g.strong_benefit();
        let cap = subset_cap.min(63);
        if strong && self.groups.len() > cap {
            return Err(SubsetCapExceeded {
                size: self.groups.len(),
                cap,
            });
        }
        Ok(self.audit(g, strong))
    }

    fn union(&self, mask: u64) -> Relaxation {
        Relaxation::from_indices(
            self.groups
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .flat_map(|(_, r)| r.indices().iter().copied()),
        )
    }

    pub fn audit(&self, g: Guarantee, enumerate_subsets: bool) -> GuaranteeReport {
        let inst = self.inst;
        let base = guaranteed_agents(&inst.compatible_graph());
        let mut violations = Vec::new();
        let mut checked = 0;

        let mut check = |mask: u64, is_full: bool| {
            checked += 1;
            let subset = if is_full && !enumerate_subsets {
                Relaxation::from_indices(self.groups.iter().flat_map(|r| r.indices().iter().copied()))
            } else {
                self.union(mask)
            };
            let gamma = guaranteed_agents(&inst.graph_with(&subset));
            if g.strong_no_harm() || is_full {
                let missing = base.missing_from(&gamma);
                if !missing.is_empty() {
                    violations.push(self.violation(ViolationKind::NoHarm, mask, is_full, missing));
                }
            }
            if g.strong_benefit() || is_full {
                let relaxers = GuaranteedSet::from_agents(subset.agents(inst));
                let missing = relaxers.missing_from(&gamma);
                if !missing.is_empty() {
                    violations.push(self.violation(ViolationKind::Benefit, mask, is_full, missing));
                }
            }
        };

        if enumerate_subsets {
            let full = (1u64 << self.groups.len()) - 1;
            for mask in 0..=full {
                check(mask, mask == full);
            }
        } else {
            check(0, true);
        }

        GuaranteeReport {
            guarantee: g,
            passed: violations.is_empty(),
            subsets_checked: checked,
            violations,
            optimality: None,
            search_consistent: None,
            notes: Vec::new(),
        }
    }

    fn violation(&self, kind: ViolationKind, mask: u64, is_full: bool, missing: Vec<usize>) -> Violation {
        let subset = self
            .labels
            .iter()
            .enumerate()
            .filter(|(bit, _)| is_full || mask >> bit & 1 == 1)
            .map(|(_, l)| l.clone())
            .collect();
        let names: BTreeSet<&str> = missing.iter().map(|&x| self.agent_names[x].as_str()).collect();
        Violation {
            kind,
            subset,
            unguaranteed: names.into_iter().map(str::to_string).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::strictness;

    #[test]
    fn empty_relaxation_always_passes() {
        let inst = strictness();
        for g in Guarantee::ALL {
            let report = check_guarantee(&inst, &Relaxation::empty(), g, DEFAULT_SUBSET_CAP).unwrap();
            assert!(report.passed, "{g}");
        }
    }

    #[test]
    fn weak_guarantee_holds_for_full_relaxation() {
        // Unique size-2 maximum matching {x1y2, x2y1}.
        let inst = strictness();
        let report = check_guarantee(&inst, &Relaxation::all(&inst), Guarantee::WnhWb, 12).unwrap();
        assert!(report.passed);
        assert_eq!(report.subsets_checked, 1);
    }

    #[test]
    fn strong_guarantee_fails_on_partial_subset() {
        // F = {(x2,y1)} leaves {(x1,y1),(x2,y1)} with Γ = ∅, so x1 is harmed
        // and x2 does not benefit.
        let inst = strictness();
        let report = check_guarantee(&inst, &Relaxation::all(&inst), Guarantee::SnhSb, 12).unwrap();
        assert!(!report.passed);
        let harm: Vec<_> = report.violations_of(ViolationKind::NoHarm).collect();
        assert_eq!(harm.len(), 1);
        assert_eq!(
            harm[0].subset,
            vec![EdgeLabel {
                agent: "x2".into(),
                resource: "y1".into()
            }]
        );
        assert_eq!(harm[0].unguaranteed, vec!["x1".to_string()]);
    }

    #[test]
    fn cap_exceeded_is_an_error() {
        let inst = strictness();
        let err = check_guarantee(&inst, &Relaxation::all(&inst), Guarantee::SnhWb, 1).unwrap_err();
        assert_eq!(err, SubsetCapExceeded { size: 2, cap: 1 });
        // Weak checks have no cap.
        assert!(check_guarantee(&inst, &Relaxation::all(&inst), Guarantee::WnhWb, 1).is_ok());
    }
}
