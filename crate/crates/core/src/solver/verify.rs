// SPDX-License-Identifier: Apache-2.0

//! Post-hoc audit of a solve: guarantee checks, brute-force optimality and
//! agreement between the two search modes. Nothing here changes `Ê`.

use crate::guarantee::{AuditTarget, GuaranteeReport, OptimalityCheck};
use crate::matching::maximum_matching_size;
use crate::model::{aggregate_cost, Instance, Relaxation};
use crate::oracle::{brute_force_optimum, OracleCaps};
use crate::rational::format_rational;

use super::{solve, SolveResult, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    pub subset_cap: usize,
    pub oracle: OracleCaps,
    /// Re-run the other search mode and compare.
    pub check_search: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            subset_cap: crate::guarantee::DEFAULT_SUBSET_CAP,
            oracle: OracleCaps::default(),
            check_search: true,
        }
    }
}

pub fn verify_result(inst: &Instance, cfg: &SolverConfig, res: &SolveResult, opts: &VerifyOptions) -> GuaranteeReport {
    // The one-to-one problem the search actually ran on.
    let (solved, solved_rel): (&Instance, &Relaxation) = match &res.expansion {
        Some(ex) => (&ex.expansion.expanded, &ex.relaxation),
        None => (inst, &res.relaxation),
    };

    let target = match &res.expansion {
        None => AuditTarget::singletons(inst, &res.relaxation),
        Some(ex) => {
            let e = &ex.expansion;
            AuditTarget {
                inst: &e.expanded,
                groups: e.groups(&res.relaxation),
                labels: res.relaxation.labels(inst),
                agent_names: (0..e.expanded.agent_count())
                    .map(|x| inst.agent_id(e.agent_origin(x)).0.clone())
                    .collect(),
            }
        }
    };

    let mut report = match target.check(cfg.guarantee, opts.subset_cap) {
        Ok(r) => r,
        Err(cap) => {
            let mut r = target.audit(cfg.guarantee, false);
            r.notes.push(format!("{cap}; only the full relaxation was checked"));
            r
        }
    };

    match brute_force_optimum(solved, cfg, &opts.oracle) {
        Ok(v) => {
            let size = maximum_matching_size(&solved.graph_with(solved_rel));
            let cost = aggregate_cost(solved, solved_rel, cfg.aggregation);
            report.optimality = Some(OptimalityCheck {
                solver_allocation_size: size,
                solver_cost: format_rational(&cost),
                oracle_best_allocation_size: v.best_mu,
                oracle_min_cost: format_rational(&v.best_cost),
                optimal: size == v.best_mu && cost == v.best_cost,
            });
        }
        Err(e) => report.notes.push(format!("optimality not checked: {e}")),
    }

    if opts.check_search {
        let other = cfg.clone().with_search(cfg.search.other());
        match solve(solved, &other) {
            Ok(alt) => {
                let same = alt.relaxation == *solved_rel;
                if !same {
                    report
                        .notes
                        .push(format!("{} and {} search disagree", cfg.search, other.search));
                }
                report.search_consistent = Some(same);
            }
            Err(e) => report.notes.push(format!("search comparison skipped: {e}")),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guarantee::ViolationKind;
    use crate::model::fixtures::{rat, strictness};
    use crate::model::{Aggregation, Bound, Guarantee};
    use crate::solver::solve_allocation;

    fn run(g: Guarantee) -> GuaranteeReport {
        let inst = strictness();
        let cfg = SolverConfig::new(g, Aggregation::TotalCost, Bound::Finite(rat(10)));
        let res = solve_allocation(&inst, &cfg).unwrap();
        verify_result(&inst, &cfg, &res, &VerifyOptions::default())
    }

    #[test]
    fn snh_sb_result_passes_every_subset() {
        let r = run(Guarantee::SnhSb);
        assert!(r.passed);
        assert_eq!(r.subsets_checked, 1);
        assert!(r.optimality.unwrap().optimal);
        assert_eq!(r.search_consistent, Some(true));
    }

    #[test]
    fn wnh_wb_result_passes_full_set() {
        let r = run(Guarantee::WnhWb);
        assert!(r.passed);
        assert!(r.optimality.unwrap().optimal);
    }

    #[test]
    fn snh_wb_result_is_flagged() {
        // Ê = {(x2,y1)} leaves Γ = ∅: x1 is harmed and x2 gains nothing.
        let r = run(Guarantee::SnhWb);
        assert!(!r.passed);
        assert_eq!(r.violations_of(ViolationKind::NoHarm).count(), 1);
        assert_eq!(r.violations_of(ViolationKind::Benefit).count(), 1);
        // μ stays 1 at cost 1, while the oracle reaches μ = 1 at cost 0.
        let opt = r.optimality.unwrap();
        assert_eq!((opt.solver_allocation_size, opt.oracle_best_allocation_size), (1, 1));
        assert!(!opt.optimal);
    }
}
