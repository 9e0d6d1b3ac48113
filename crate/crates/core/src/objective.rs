//! Exact cost rates, computed three independent ways.
//!
//! * [`module_cost_rate`]: the inclusion–exclusion sum over nonempty subsets
//!   of the triggering cycle times, each term `±1/lcm(subset)`.
//! * [`union_density`]: counts the maintenance instants of one full period.
//! * [`simulated_cost`]: replays the schedule period by period and averages
//!   what was paid.
//!
//! All three agree exactly on every feasible input. Only the first is used
//! by the solver; the other two exist to check it.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::error::Error;
use crate::model::{trigger_set, Instance, Node, NodeId, Schedule};
use crate::numtheory::{lcm, PosInt};
use crate::rational::ExactRational;

/// Largest number of distinct cycle times [`module_cost_rate`] will enumerate
/// subsets of.
pub const DEFAULT_SUBSET_CAP: usize = 20;

/// Largest period [`union_density`] will count through.
pub const DEFAULT_PERIOD_CAP: u64 = 10_000_000;

/// Cost rate of every node and their sum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostBreakdown {
    pub per_component: BTreeMap<NodeId, ExactRational>,
    pub per_module: BTreeMap<NodeId, ExactRational>,
    pub total: ExactRational,
}

/// `setup · Σ_{∅≠C⊆Q} (−1)^{|C|+1} / lcm(C)` over the distinct values of `cycle_times`.
pub fn module_cost_rate(
    setup: &ExactRational,
    cycle_times: &[PosInt],
) -> Result<ExactRational, Error> {
    module_cost_rate_with_cap(setup, cycle_times, DEFAULT_SUBSET_CAP)
}

pub fn module_cost_rate_with_cap(
    setup: &ExactRational,
    cycle_times: &[PosInt],
    subset_cap: usize,
) -> Result<ExactRational, Error> {
    let mut distinct: Vec<&BigUint> = cycle_times.iter().map(PosInt::get).collect();
    if distinct.is_empty() {
        return Err(Error::EmptyLcm);
    }
    distinct.sort();
    distinct.dedup();
    if distinct.len() > subset_cap {
        return Err(Error::SubsetCapExceeded {
            distinct: distinct.len(),
            cap: subset_cap,
        });
    }
    if setup.is_zero() {
        return Ok(ExactRational::zero());
    }

    // Every subset lcm divides the full lcm, so each term is an integer over
    // the common denominator `period`.
    let period = distinct
        .iter()
        .skip(1)
        .fold(distinct[0].clone(), |acc, q| acc.lcm(q));
    let mut numer = BigInt::zero();
    // (next index to consider, lcm so far, subset size)
    let mut stack: Vec<(usize, BigUint, usize)> = Vec::new();
    for (i, q) in distinct.iter().enumerate() {
        stack.push((i + 1, (*q).clone(), 1));
    }
    while let Some((next, sub_lcm, size)) = stack.pop() {
        let term = BigInt::from(&period / &sub_lcm);
        if size % 2 == 1 {
            numer += term;
        } else {
            numer -= term;
        }
        for (j, q) in distinct.iter().enumerate().skip(next) {
            stack.push((j + 1, sub_lcm.lcm(q), size + 1));
        }
    }

    Ok(setup * &ExactRational::from_parts_unchecked(numer, period))
}

/// Fraction of instants `t ∈ 1..=P` divisible by some cycle time, where `P`
/// is their lcm.
pub fn union_density(cycle_times: &[PosInt]) -> Result<ExactRational, Error> {
    union_density_with_cap(cycle_times, DEFAULT_PERIOD_CAP)
}

pub fn union_density_with_cap(
    cycle_times: &[PosInt],
    period_cap: u64,
) -> Result<ExactRational, Error> {
    let period = lcm(cycle_times)?;
    let p = period
        .to_u64()
        .filter(|p| *p <= period_cap)
        .ok_or_else(|| Error::PeriodCapExceeded {
            period: period.clone(),
            cap: period_cap,
        })?;
    let len = usize::try_from(p).expect("period fits in memory");
    let mut hit = vec![false; len + 1];
    for q in cycle_times {
        let q = q.to_u64().expect("divides the period") as usize;
        for t in (q..=len).step_by(q) {
            hit[t] = true;
        }
    }
    let count = hit.iter().filter(|h| **h).count();
    Ok(ExactRational::new(count as u64, p).expect("p >= 1"))
}

/// An instance resolved for repeated evaluation: components in sorted id
/// order, each module with the indices of its triggering components.
pub(crate) struct Prepared<'a> {
    pub components: Vec<&'a Node>,
    pub modules: Vec<(&'a Node, Vec<usize>)>,
}

impl<'a> Prepared<'a> {
    pub fn new(instance: &'a Instance) -> Result<Self, Error> {
        instance.ensure_valid()?;
        let mut components: Vec<&Node> = instance.components().collect();
        components.sort_by(|a, b| a.id.cmp(&b.id));
        let index: BTreeMap<&NodeId, usize> = components
            .iter()
            .enumerate()
            .map(|(i, n)| (&n.id, i))
            .collect();
        let mut modules = Vec::new();
        let mut module_nodes: Vec<&Node> = instance.modules().collect();
        module_nodes.sort_by(|a, b| a.id.cmp(&b.id));
        for m in module_nodes {
            let triggers = trigger_set(instance, &m.id)?
                .iter()
                .map(|c| index[c])
                .collect();
            modules.push((m, triggers));
        }
        Ok(Prepared {
            components,
            modules,
        })
    }

    pub fn limit(&self, i: usize) -> &'a PosInt {
        self.components[i].cycle_limit().expect("component")
    }

    /// Cycle times in component order, after checking the schedule.
    pub fn cycle_times(&self, instance: &Instance, schedule: &Schedule) -> Result<Vec<PosInt>, Error> {
        schedule.check_against(instance)?;
        Ok(self
            .components
            .iter()
            .map(|c| schedule.get(&c.id).expect("checked").clone())
            .collect())
    }

    pub fn schedule(&self, cycle_times: &[PosInt]) -> Schedule {
        self.components
            .iter()
            .zip(cycle_times)
            .map(|(c, q)| (c.id.clone(), q.clone()))
            .collect()
    }

    pub fn breakdown(&self, cycle_times: &[PosInt], subset_cap: usize) -> Result<CostBreakdown, Error> {
        let mut total = ExactRational::zero();
        let mut per_component = BTreeMap::new();
        for (c, q) in self.components.iter().zip(cycle_times) {
            let rate = &c.setup_cost / &ExactRational::from(q);
            total += &rate;
            per_component.insert(c.id.clone(), rate);
        }
        let mut per_module = BTreeMap::new();
        for (m, triggers) in &self.modules {
            let rate = if triggers.is_empty() {
                ExactRational::zero()
            } else {
                let qs: Vec<PosInt> = triggers.iter().map(|&i| cycle_times[i].clone()).collect();
                module_cost_rate_with_cap(&m.setup_cost, &qs, subset_cap)?
            };
            total += &rate;
            per_module.insert(m.id.clone(), rate);
        }
        Ok(CostBreakdown {
            per_component,
            per_module,
            total,
        })
    }
}

/// Long-run setup cost rate of `schedule` on `instance`, per node.
pub fn cost_rate(instance: &Instance, schedule: &Schedule) -> Result<CostBreakdown, Error> {
    cost_rate_with_cap(instance, schedule, DEFAULT_SUBSET_CAP)
}

pub fn cost_rate_with_cap(
    instance: &Instance,
    schedule: &Schedule,
    subset_cap: usize,
) -> Result<CostBreakdown, Error> {
    let prepared = Prepared::new(instance)?;
    let qs = prepared.cycle_times(instance, schedule)?;
    prepared.breakdown(&qs, subset_cap)
}

/// Average cost per period over `t = 1..=horizon`, obtained by replaying
/// the schedule. Time 0 is the fresh state and costs nothing.
pub fn simulated_cost(
    instance: &Instance,
    schedule: &Schedule,
    horizon: &PosInt,
) -> Result<ExactRational, Error> {
    let prepared = Prepared::new(instance)?;
    let qs = prepared.cycle_times(instance, schedule)?;
    let h = horizon
        .to_u64()
        .ok_or_else(|| Error::HorizonTooLong(horizon.clone()))?;
    // A cycle time beyond the horizon is never reached.
    let qs: Vec<Option<u64>> = qs.iter().map(PosInt::to_u64).collect();

    let mut component_visits = vec![0u64; qs.len()];
    let mut module_visits = vec![0u64; prepared.modules.len()];
    let mut maintained = vec![false; qs.len()];
    for t in 1..=h {
        for (i, q) in qs.iter().enumerate() {
            maintained[i] = q.is_some_and(|q| t % q == 0);
            if maintained[i] {
                component_visits[i] += 1;
            }
        }
        for (j, (_, triggers)) in prepared.modules.iter().enumerate() {
            if triggers.iter().any(|&i| maintained[i]) {
                module_visits[j] += 1;
            }
        }
    }

    let mut paid = ExactRational::zero();
    for (c, n) in prepared.components.iter().zip(&component_visits) {
        paid += &c.setup_cost * &ExactRational::from(*n);
    }
    for ((m, _), n) in prepared.modules.iter().zip(&module_visits) {
        paid += &m.setup_cost * &ExactRational::from(*n);
    }
    Ok(paid / ExactRational::from(h))
}

/// lcm of every cycle time in the schedule: one full period.
pub fn schedule_period(schedule: &Schedule) -> Result<PosInt, Error> {
    let qs: Vec<PosInt> = schedule.iter().map(|(_, q)| q.clone()).collect();
    lcm(&qs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InstanceBuilder, TriggerMode};
    use proptest::prelude::*;

    fn p(v: u64) -> PosInt {
        PosInt::from(v)
    }

    fn ps(vs: &[u64]) -> Vec<PosInt> {
        vs.iter().copied().map(p).collect()
    }

    fn r(a: i64, b: i64) -> ExactRational {
        ExactRational::new(a, b).unwrap()
    }

    // Brute-force count of {t in 1..=P : some q | t} / P, written out plainly.
    fn count_oracle(qs: &[u64]) -> ExactRational {
        let period = qs.iter().fold(1u64, |acc, &q| acc / crate::numtheory::gcd_u64(acc, q) * q);
        let hits = (1..=period).filter(|t| qs.iter().any(|q| t % q == 0)).count();
        r(hits as i64, period as i64)
    }

    fn figure_one(k0: i64, k1: i64, k2: i64) -> Instance {
        InstanceBuilder::new("0")
            .module("0", k0)
            .component("1", k1, 5)
            .component("2", k2, 6)
            .edge("0", "1")
            .edge("0", "2")
            .build()
    }

    fn fcmj15() -> Instance {
        InstanceBuilder::new("0")
            .module("0", 1)
            .component("1", 3149, 15)
            .component("2", 0, 13)
            .edge("0", "1")
            .edge("0", "2")
            .build()
    }

    fn sched(pairs: &[(&str, u64)]) -> Schedule {
        pairs.iter().map(|(k, q)| (*k, *q)).collect()
    }

    #[test]
    fn frozen_oracle_values() {
        assert_eq!(count_oracle(&[4, 6]), r(1, 3));
        assert_eq!(count_oracle(&[2, 3, 5]), r(11, 15));
    }

    #[test]
    fn module_cost_rate_examples() {
        let one = ExactRational::one();
        assert_eq!(module_cost_rate(&one, &ps(&[4, 6])).unwrap(), r(1, 3));
        assert_eq!(module_cost_rate(&r(7, 2), &ps(&[5])).unwrap(), r(7, 10));
        assert_eq!(module_cost_rate(&one, &ps(&[2, 3, 5])).unwrap(), r(11, 15));
        // duplicates are one progression
        assert_eq!(module_cost_rate(&one, &ps(&[4, 6, 4, 6])).unwrap(), r(1, 3));
    }

    #[test]
    fn module_cost_rate_refuses_large_sets() {
        let qs: Vec<PosInt> = (1..=21).map(p).collect();
        match module_cost_rate(&ExactRational::one(), &qs) {
            Err(Error::SubsetCapExceeded { distinct: 21, cap: 20 }) => {}
            other => panic!("{other:?}"),
        }
        assert!(module_cost_rate_with_cap(&ExactRational::one(), &ps(&[2, 3]), 1).is_err());
        assert!(matches!(
            module_cost_rate(&ExactRational::one(), &[]),
            Err(Error::EmptyLcm)
        ));
    }

    #[test]
    fn union_density_examples() {
        assert_eq!(union_density(&ps(&[4, 6])).unwrap(), r(1, 3));
        assert_eq!(union_density(&ps(&[1])).unwrap(), r(1, 1));
        assert_eq!(union_density(&ps(&[2, 4])).unwrap(), r(1, 2));
        match union_density_with_cap(&ps(&[7, 11]), 50) {
            Err(Error::PeriodCapExceeded { period, cap: 50 }) => assert_eq!(period, p(77)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cost_rate_examples() {
        let fig = figure_one(3, 2, 1);
        let b = cost_rate(&fig, &sched(&[("1", 4), ("2", 6)])).unwrap();
        assert_eq!(b.total, r(5, 3));
        assert_eq!(b.per_component[&NodeId::from("1")], r(1, 2));
        assert_eq!(b.per_component[&NodeId::from("2")], r(1, 6));
        assert_eq!(b.per_module[&NodeId::from("0")], r(1, 1));

        let b = cost_rate(&fig, &sched(&[("1", 1), ("2", 1)])).unwrap();
        assert_eq!(b.total, r(6, 1));

        let b = cost_rate(&fcmj15(), &sched(&[("1", 15), ("2", 10)])).unwrap();
        assert_eq!(b.total, r(3151, 15));
    }

    #[test]
    fn cost_rate_errors() {
        let fig = figure_one(3, 2, 1);
        match cost_rate(&fig, &sched(&[("1", 6), ("2", 6)])) {
            Err(Error::Infeasible { component, .. }) => assert_eq!(component.as_str(), "1"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            cost_rate(&fig, &sched(&[("2", 6)])),
            Err(Error::MissingCycleTime(_))
        ));
        let broken = InstanceBuilder::new("1").component("1", 1, 1).build();
        assert!(matches!(
            cost_rate(&broken, &sched(&[("1", 1)])),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn simulated_cost_examples() {
        let fig = figure_one(3, 2, 1);
        let s = sched(&[("1", 4), ("2", 6)]);
        assert_eq!(simulated_cost(&fig, &s, &p(12)).unwrap(), r(5, 3));
        assert_eq!(schedule_period(&s).unwrap(), p(12));

        let single = InstanceBuilder::new("m")
            .module("m", 0)
            .component("c", 1, 5)
            .edge("m", "c")
            .build();
        assert_eq!(
            simulated_cost(&single, &sched(&[("c", 3)]), &p(4)).unwrap(),
            r(1, 4)
        );
        assert_eq!(
            simulated_cost(&fig, &sched(&[("1", 1), ("2", 1)]), &p(1)).unwrap(),
            r(6, 1)
        );
    }

    #[test]
    fn deep_tree_modes_differ() {
        let tree = InstanceBuilder::new("r")
            .module("r", 10)
            .module("mid", 1)
            .component("c1", 0, 4)
            .component("c2", 0, 4)
            .edge("r", "mid")
            .edge("mid", "c1")
            .edge("mid", "c2")
            .build();
        let s = sched(&[("c1", 2), ("c2", 3)]);
        let desc = cost_rate(&tree, &s).unwrap();
        assert_eq!(desc.per_module[&NodeId::from("r")], r(20, 3));
        let direct = cost_rate(&tree.clone().with_trigger_mode(TriggerMode::DirectChildren), &s).unwrap();
        assert_eq!(direct.per_module[&NodeId::from("r")], ExactRational::zero());
        assert_eq!(direct.per_module[&NodeId::from("mid")], r(2, 3));
    }

    fn arb_costs() -> impl Strategy<Value = Vec<(i64, i64)>> {
        proptest::collection::vec((0i64..20, 1i64..5), 5)
    }

    proptest! {
        #[test]
        fn inclusion_exclusion_matches_counting(qs in proptest::collection::vec(1u64..30, 1..5)) {
            let qs_p = ps(&qs);
            let ie = module_cost_rate(&ExactRational::one(), &qs_p).unwrap();
            prop_assert_eq!(&ie, &union_density(&qs_p).unwrap());
            prop_assert_eq!(ie, count_oracle(&qs));
        }

        #[test]
        fn module_rate_bounds_and_monotonicity(
            qs in proptest::collection::vec(1u64..40, 1..6),
            extra in 1u64..40,
            k in 0i64..50,
        ) {
            let k = ExactRational::from(k);
            let qs_p = ps(&qs);
            let rate = module_cost_rate(&k, &qs_p).unwrap();
            let min_q = *qs.iter().min().unwrap();
            let lower = &k / &ExactRational::from(min_q);
            let harmonic: ExactRational = qs.iter().map(|&q| r(1, q as i64)).sum();
            let upper = &k * &std::cmp::min(ExactRational::one(), harmonic);
            prop_assert!(lower <= rate);
            prop_assert!(rate <= upper);

            let mut more = qs_p.clone();
            more.push(p(extra));
            prop_assert!(module_cost_rate(&k, &more).unwrap() >= rate);
        }

        #[test]
        fn full_period_simulation_equals_formula(
            costs in arb_costs(),
            qs in proptest::collection::vec(1u64..=6, 3),
            direct in any::<bool>(),
        ) {
            let c = |i: usize| r(costs[i].0, costs[i].1);
            let mode = if direct { TriggerMode::DirectChildren } else { TriggerMode::Descendants };
            let inst = InstanceBuilder::new("r")
                .module("r", c(0))
                .module("m", c(1))
                .component("a", c(2), 6)
                .component("b", c(3), 6)
                .component("d", c(4), 6)
                .edge("r", "a")
                .edge("r", "m")
                .edge("m", "b")
                .edge("m", "d")
                .trigger_mode(mode)
                .build();
            let s = sched(&[("a", qs[0]), ("b", qs[1]), ("d", qs[2])]);
            let period = schedule_period(&s).unwrap();
            let total = cost_rate(&inst, &s).unwrap().total;
            prop_assert_eq!(simulated_cost(&inst, &s, &period).unwrap(), total);
        }

        #[test]
        fn scaling_costs_scales_breakdown(
            costs in arb_costs(),
            qs in proptest::collection::vec(1u64..=5, 2),
            lam in (1i64..9, 1i64..9),
        ) {
            let lam = r(lam.0, lam.1);
            let c = |i: usize| r(costs[i].0, costs[i].1);
            let build = |scale: &ExactRational| InstanceBuilder::new("0")
                .module("0", scale * &c(0))
                .component("1", scale * &c(1), 5)
                .component("2", scale * &c(2), 5)
                .edge("0", "1")
                .edge("0", "2")
                .build();
            let s = sched(&[("1", qs[0]), ("2", qs[1])]);
            let base = cost_rate(&build(&ExactRational::one()), &s).unwrap();
            let scaled = cost_rate(&build(&lam), &s).unwrap();
            prop_assert_eq!(&scaled.total, &(&base.total * &lam));
            for (k, v) in &base.per_component {
                prop_assert_eq!(&scaled.per_component[k], &(v * &lam));
            }
            for (k, v) in &base.per_module {
                prop_assert_eq!(&scaled.per_module[k], &(v * &lam));
            }
        }
    }
}
