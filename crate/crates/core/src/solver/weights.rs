// SPDX-License-Identifier: Apache-2.0

//! Integer edge weights for the dummy-agent search.
//!
//! The per-edge unit `u` is 1 under the size aggregation and the discomfort
//! under the total-cost aggregation. The fractional weights
//! `|X|+1 - u(e)/max u` are multiplied by `U = L·max u`, where `L` is the lcm
//! of the denominators of `u`, giving exact integers. A positive global scale
//! leaves every argmax unchanged.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::matching::{guaranteed_agents, GuaranteedSet};
use crate::model::{Aggregation, Guarantee, Instance};

use super::SolveError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightScheme {
    pub guarantee: Guarantee,
    /// `|X| + 1`.
    pub w_star: i128,
    /// `U`: the largest scaled unit, 1 when there are no relaxable pairs.
    pub unit_max: i128,
    /// Scaled unit `u(e)·L` per relaxable pair, in instance order.
    pub units: Vec<i128>,
    /// Weight per compatible pair, in instance order.
    pub compatible: Vec<i128>,
    /// Weight per relaxable pair, in instance order.
    pub relaxable: Vec<i128>,
    /// Weight of every dummy edge.
    pub dummy: i128,
    /// `Γ(E)`, computed only for the SNH-WB scheme.
    pub guaranteed: Option<GuaranteedSet>,
}

fn to_i128(v: &BigInt) -> Result<i128, SolveError> {
    v.to_i128().ok_or(SolveError::WeightOverflow)
}

fn mul(a: i128, b: i128) -> Result<i128, SolveError> {
    a.checked_mul(b).ok_or(SolveError::WeightOverflow)
}

fn sub(a: i128, b: i128) -> Result<i128, SolveError> {
    a.checked_sub(b).ok_or(SolveError::WeightOverflow)
}

pub fn build_weights(inst: &Instance, guarantee: Guarantee, aggregation: Aggregation) -> Result<WeightScheme, SolveError> {
    let raw_units: Vec<_> = inst
        .relaxable()
        .iter()
        .map(|r| aggregation.unit(&r.discomfort))
        .collect();
    let lcm = raw_units
        .iter()
        .fold(BigInt::one(), |acc, u| acc.lcm(u.denom()));
    let units = raw_units
        .iter()
        .map(|u| to_i128(&(u.numer() * (&lcm / u.denom()))))
        .collect::<Result<Vec<_>, _>>()?;
    let unit_max = units.iter().copied().max().unwrap_or(1);
    let w_star = inst.agent_count() as i128 + 1;

    let (compat_w, relax_base) = match guarantee {
        Guarantee::SnhSb => (mul(mul(w_star, w_star)?, unit_max)?, mul(w_star, unit_max)?),
        Guarantee::SnhWb | Guarantee::WnhWb => {
            let w = mul(w_star, unit_max)?;
            (w, w)
        }
    };
    let guaranteed = (guarantee == Guarantee::SnhWb).then(|| guaranteed_agents(&inst.compatible_graph()));
    let in_gamma = |agent: usize| guaranteed.as_ref().is_some_and(|g| g.contains(agent));

    let compatible: Vec<i128> = inst
        .compatible()
        .iter()
        .map(|e| if in_gamma(e.agent) { -unit_max } else { compat_w })
        .collect();
    let relaxable: Vec<i128> = inst
        .relaxable()
        .iter()
        .zip(&units)
        .map(|(r, &u)| {
            if in_gamma(r.edge.agent) {
                Ok(-unit_max)
            } else {
                sub(relax_base, u)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    // Negative weights never enter a maximum-weight matching, so only the
    // positive ones bound what a real matching can be worth.
    let positive_sum = compatible
        .iter()
        .chain(&relaxable)
        .filter(|&&w| w > 0)
        .try_fold(0i128, |acc, &w| acc.checked_add(w))
        .ok_or(SolveError::WeightOverflow)?;
    let dummy = positive_sum.checked_add(1).ok_or(SolveError::WeightOverflow)?;
    // Headroom for the Hungarian potentials: every row and column together.
    let span = (inst.agent_count() + 2 * inst.resource_count() + 2) as i128;
    mul(mul(dummy, span)?, 4)?;

    Ok(WeightScheme {
        guarantee,
        w_star,
        unit_max,
        units,
        compatible,
        relaxable,
        dummy,
        guaranteed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{instance, strictness};

    #[test]
    fn snh_sb_size_compatible_weight() {
        // |X| = 2, U = 1: (|X|+1)² = 9.
        let inst = strictness();
        let w = build_weights(&inst, Guarantee::SnhSb, Aggregation::Size).unwrap();
        assert_eq!(w.compatible, vec![9]);
        assert_eq!(w.relaxable, vec![2, 2]);
        assert_eq!(w.dummy, 1 + 9 + 2 + 2);
    }

    #[test]
    fn snh_sb_total_cost_relaxable_weight() {
        // ρ = 4 = U: 3·4 - 4 = 8.
        let inst = instance(&["x1", "x2"], &["y1"], &[], &[("x1", "y1", 4)]);
        let w = build_weights(&inst, Guarantee::SnhSb, Aggregation::TotalCost).unwrap();
        assert_eq!(w.unit_max, 4);
        assert_eq!(w.relaxable, vec![8]);
    }

    #[test]
    fn snh_wb_negative_for_guaranteed_agents() {
        // Γ(E) = {x1}; both of x1's edges get -U, x2's relaxable edge keeps
        // its weak weight (|X|+1)·U - u = 2.
        let inst = strictness();
        let w = build_weights(&inst, Guarantee::SnhWb, Aggregation::Size).unwrap();
        assert_eq!(w.compatible, vec![-1]);
        assert_eq!(w.relaxable, vec![-1, 2]);
        assert_eq!(w.dummy, 3);
    }

    #[test]
    fn wnh_wb_weights() {
        let inst = strictness();
        let w = build_weights(&inst, Guarantee::WnhWb, Aggregation::Size).unwrap();
        assert_eq!(w.compatible, vec![3]);
        assert_eq!(w.relaxable, vec![2, 2]);
    }

    #[test]
    fn fractional_discomforts_scale_exactly() {
        let inst = Instance::validate(crate::model::RawInstance {
            agents: vec![crate::model::RawAgent::new("a", 1)],
            resources: vec![crate::model::RawResource::new("p", 1), crate::model::RawResource::new("q", 1)],
            compatible: vec![],
            relaxable: vec![
                crate::model::RawRelaxable {
                    agent: "a".into(),
                    resource: "p".into(),
                    discomfort: crate::rational::parse_rational("0.5").unwrap(),
                },
                crate::model::RawRelaxable {
                    agent: "a".into(),
                    resource: "q".into(),
                    discomfort: crate::rational::parse_rational("1/3").unwrap(),
                },
            ],
        })
        .unwrap();
        let w = build_weights(&inst, Guarantee::WnhWb, Aggregation::TotalCost).unwrap();
        // L = 6: units 3 and 2, U = 3, w* = 2.
        assert_eq!(w.units, vec![3, 2]);
        assert_eq!(w.relaxable, vec![3, 4]);
    }

    #[test]
    fn empty_relaxable_set_uses_unit_one() {
        let inst = instance(&["x"], &["y"], &[("x", "y")], &[]);
        let w = build_weights(&inst, Guarantee::SnhSb, Aggregation::TotalCost).unwrap();
        assert_eq!(w.unit_max, 1);
        assert_eq!(w.compatible, vec![4]);
    }
}
