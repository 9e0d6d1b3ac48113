//! Exact minimization of the setup cost rate over integer cycle times.
//!
//! Both searches walk the schedule space depth-first, components in sorted
//! id order, each cycle time descending from its limit. That visits
//! schedules in decreasing lexicographic order, so accepting every value
//! `<=` the incumbent leaves the lexicographically smallest optimum in
//! hand, and a subtree may only be cut when its bound is strictly worse
//! than the incumbent.
//!
//! The bound at a partial assignment charges each fixed component `K/q`,
//! each free one `K/f`, and each module `K` times the largest single-
//! component frequency it can be forced to. Every term undercuts what any
//! completion pays.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::Error;
use crate::model::{Instance, InstanceBuilder, Schedule};
use crate::numtheory::{gcd_u64, PosInt};
use crate::objective::{Prepared, DEFAULT_SUBSET_CAP};
use crate::rational::ExactRational;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveReport {
    pub optimal_schedule: Schedule,
    pub optimal_value: ExactRational,
    /// Complete schedules whose objective was evaluated.
    pub evaluations: u64,
    /// Partial assignments discarded by the lower bound.
    pub pruned: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Maximum number of objective evaluations before giving up.
    pub budget: u64,
    pub subset_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            budget: DEFAULT_BUDGET,
            subset_cap: DEFAULT_SUBSET_CAP,
        }
    }
}

/// [`SolverConfig::solve_exact`] with default settings.
pub fn solve_exact(instance: &Instance) -> Result<SolveReport, Error> {
    SolverConfig::default().solve_exact(instance)
}

/// [`SolverConfig::solve_two_component`] with default settings.
pub fn solve_two_component(
    k0: &ExactRational,
    k1: &ExactRational,
    k2: &ExactRational,
    f1: &PosInt,
    f2: &PosInt,
) -> Result<SolveReport, Error> {
    SolverConfig::default().solve_two_component(k0, k1, k2, f1, f2)
}

/// Lower bound on the cost of any feasible completion of `fixed`.
///
/// Components absent from `fixed` are free.
pub fn partial_lower_bound(instance: &Instance, fixed: &Schedule) -> Result<ExactRational, Error> {
    let prepared = Prepared::new(instance)?;
    for (id, q) in fixed.iter() {
        let Some(i) = prepared.components.iter().position(|c| &c.id == id) else {
            return Err(Error::UnexpectedScheduleEntry(id.clone()));
        };
        let limit = prepared.limit(i);
        if q > limit {
            return Err(Error::Infeasible {
                component: id.clone(),
                cycle_time: q.clone(),
                cycle_limit: limit.clone(),
            });
        }
    }
    let cycle: Vec<Option<&PosInt>> = prepared.components.iter().map(|c| fixed.get(&c.id)).collect();
    Ok(bound(&prepared, &cycle))
}

fn bound(prepared: &Prepared<'_>, cycle: &[Option<&PosInt>]) -> ExactRational {
    let effective = |i: usize| cycle[i].unwrap_or_else(|| prepared.limit(i));
    let mut total = ExactRational::zero();
    for (i, c) in prepared.components.iter().enumerate() {
        total += &c.setup_cost / &ExactRational::from(effective(i));
    }
    for (m, triggers) in &prepared.modules {
        if let Some(smallest) = triggers.iter().map(|&i| effective(i)).min() {
            total += &m.setup_cost / &ExactRational::from(smallest);
        }
    }
    total
}

/// The one-module, two-component instance: module `"0"` over components
/// `"1"` and `"2"`.
pub fn two_component_instance(
    k0: &ExactRational,
    k1: &ExactRational,
    k2: &ExactRational,
    f1: &PosInt,
    f2: &PosInt,
) -> Instance {
    InstanceBuilder::new("0")
        .module("0", k0.clone())
        .component_with_limit("1", k1.clone(), f1.clone())
        .component_with_limit("2", k2.clone(), f2.clone())
        .edge("0", "1")
        .edge("0", "2")
        .build()
}

struct Search<'a> {
    prepared: Prepared<'a>,
    limits: Vec<u64>,
    config: SolverConfig,
    cycle: Vec<PosInt>,
    best: Option<(Vec<PosInt>, ExactRational)>,
    evaluations: u64,
    pruned: u64,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize) -> Result<(), Error> {
        if depth == self.cycle.len() {
            return self.evaluate();
        }
        for q in (1..=self.limits[depth]).rev() {
            self.cycle[depth] = PosInt::from(q);
            if depth + 1 < self.cycle.len() {
                if let Some((_, best)) = &self.best {
                    let fixed: Vec<Option<&PosInt>> = (0..self.cycle.len())
                        .map(|i| (i <= depth).then(|| &self.cycle[i]))
                        .collect();
                    if bound(&self.prepared, &fixed) > *best {
                        self.pruned += 1;
                        continue;
                    }
                }
            }
            self.descend(depth + 1)?;
        }
        Ok(())
    }

    fn evaluate(&mut self) -> Result<(), Error> {
        if self.evaluations >= self.config.budget {
            return Err(Error::BudgetExceeded {
                budget: self.config.budget,
                incumbent: self
                    .best
                    .take()
                    .map(|(q, v)| Box::new((self.prepared.schedule(&q), v))),
            });
        }
        self.evaluations += 1;
        let value = self.prepared.breakdown(&self.cycle, self.config.subset_cap)?.total;
        if self.best.as_ref().is_none_or(|(_, best)| value <= *best) {
            self.best = Some((self.cycle.clone(), value));
        }
        Ok(())
    }
}

impl SolverConfig {
    /// Global minimum over every feasible integer schedule, ties broken
    /// towards the lexicographically smallest schedule (components in
    /// sorted id order).
    pub fn solve_exact(&self, instance: &Instance) -> Result<SolveReport, Error> {
        let prepared = Prepared::new(instance)?;
        let limits = (0..prepared.components.len())
            .map(|i| {
                let f = prepared.limit(i);
                f.to_u64().ok_or_else(|| Error::SearchSpaceTooLarge(f.clone()))
            })
            .collect::<Result<Vec<u64>, Error>>()?;
        let n = limits.len();
        let mut search = Search {
            prepared,
            limits,
            config: *self,
            cycle: vec![PosInt::one(); n],
            best: None,
            evaluations: 0,
            pruned: 0,
        };
        search.descend(0)?;
        let (cycle, value) = search.best.expect("at least one schedule is feasible");
        Ok(SolveReport {
            optimal_schedule: search.prepared.schedule(&cycle),
            optimal_value: value,
            evaluations: search.evaluations,
            pruned: search.pruned,
        })
    }

    /// Minimizes `(K0+K1)/q1 + (K0+K2)/q2 − K0/lcm(q1,q2)` over
    /// `1 ≤ q1 ≤ f1`, `1 ≤ q2 ≤ f2`. Ties go to the smallest `q1`, then the
    /// smallest `q2`; the result matches [`SolverConfig::solve_exact`] on
    /// [`two_component_instance`].
    pub fn solve_two_component(
        &self,
        k0: &ExactRational,
        k1: &ExactRational,
        k2: &ExactRational,
        f1: &PosInt,
        f2: &PosInt,
    ) -> Result<SolveReport, Error> {
        for (name, k) in [("K0", k0), ("K1", k1), ("K2", k2)] {
            if k.is_negative() {
                return Err(Error::NegativeCost(name.to_string()));
            }
        }
        let lf1 = f1.to_u64().ok_or_else(|| Error::SearchSpaceTooLarge(f1.clone()))?;
        let lf2 = f2.to_u64().ok_or_else(|| Error::SearchSpaceTooLarge(f2.clone()))?;

        // Clear denominators; positive scaling keeps the argmin.
        let scale = [k0, k1, k2]
            .iter()
            .fold(BigInt::one(), |acc, k| acc.lcm(k.denom()));
        let int = |k: &ExactRational| k.numer() * (&scale / k.denom());
        let weights = Weights {
            k0: int(k0),
            k1: int(k1),
            k2: int(k2),
        };

        // Every numerator is at most (K0+K1+K2)·f1·f2 against a denominator of
        // at most f1·f2, so comparisons stay below (K0+K1+K2)·(f1·f2)².
        let area = BigInt::from(lf1) * BigInt::from(lf2);
        let worst = (&weights.k0 + &weights.k1 + &weights.k2 + 1u32) * 2u32 * &area * &area;
        let outcome = match (worst.to_i128(), weights.small()) {
            (Some(_), Some(small)) => search_two(&small, lf1, lf2, self.budget),
            _ => search_two(&weights, lf1, lf2, self.budget),
        };
        let to_report = |q1: u64, q2: u64, value: ExactRational, evaluations, pruned| SolveReport {
            optimal_schedule: [("1", q1), ("2", q2)].into_iter().collect(),
            optimal_value: value / ExactRational::from_integer(scale.clone()),
            evaluations,
            pruned,
        };
        match outcome {
            Ok(best) => Ok(to_report(best.q1, best.q2, best.value, best.evaluations, best.pruned)),
            Err(incumbent) => Err(Error::BudgetExceeded {
                budget: self.budget,
                incumbent: incumbent.map(|best| {
                    let r = to_report(best.q1, best.q2, best.value, 0, 0);
                    Box::new((r.optimal_schedule, r.optimal_value))
                }),
            }),
        }
    }
}

/// Integer setup costs after clearing denominators.
struct Weights {
    k0: BigInt,
    k1: BigInt,
    k2: BigInt,
}

struct SmallWeights {
    k0: i128,
    k1: i128,
    k2: i128,
}

impl Weights {
    fn small(&self) -> Option<SmallWeights> {
        Some(SmallWeights {
            k0: self.k0.to_i128()?,
            k1: self.k1.to_i128()?,
            k2: self.k2.to_i128()?,
        })
    }
}

/// A two-component objective evaluated in some exact number type.
trait TwoComponentObjective {
    type Value: Ord;
    fn value(&self, q1: u64, q2: u64) -> Self::Value;
    /// Bound with `q1` fixed and `q2` free below `f2`.
    fn bound(&self, q1: u64, f2: u64) -> Self::Value;
    fn exact(&self, value: Self::Value) -> ExactRational;
}

/// `num / den` with `den > 0`, compared by cross-multiplication. Only built
/// when the caller has proven the products fit.
#[derive(Clone, Copy, Debug)]
struct SmallFrac {
    num: i128,
    den: i128,
}

impl PartialEq for SmallFrac {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SmallFrac {}

impl PartialOrd for SmallFrac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SmallFrac {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl TwoComponentObjective for SmallWeights {
    type Value = SmallFrac;

    fn value(&self, q1: u64, q2: u64) -> SmallFrac {
        let g = gcd_u64(q1, q2);
        let (a, b) = (i128::from(q1 / g), i128::from(q2 / g));
        let lcm = a * i128::from(q2);
        SmallFrac {
            num: (self.k0 + self.k1) * b + (self.k0 + self.k2) * a - self.k0,
            den: lcm,
        }
    }

    fn bound(&self, q1: u64, f2: u64) -> SmallFrac {
        let (q1, f2) = (i128::from(q1), i128::from(f2));
        SmallFrac {
            num: self.k1 * f2 + self.k2 * q1 + self.k0 * q1.max(f2),
            den: q1 * f2,
        }
    }

    fn exact(&self, value: SmallFrac) -> ExactRational {
        ExactRational::new(value.num, value.den).expect("positive denominator")
    }
}

impl TwoComponentObjective for Weights {
    type Value = ExactRational;

    fn value(&self, q1: u64, q2: u64) -> ExactRational {
        let g = gcd_u64(q1, q2);
        let (a, b) = (BigInt::from(q1 / g), BigInt::from(q2 / g));
        let lcm = &a * BigInt::from(q2);
        let num = (&self.k0 + &self.k1) * b + (&self.k0 + &self.k2) * a - &self.k0;
        ExactRational::new(num, lcm).expect("positive denominator")
    }

    fn bound(&self, q1: u64, f2: u64) -> ExactRational {
        let num = &self.k1 * BigInt::from(f2)
            + &self.k2 * BigInt::from(q1)
            + &self.k0 * BigInt::from(q1.max(f2));
        ExactRational::new(num, BigInt::from(q1) * BigInt::from(f2)).expect("positive denominator")
    }

    fn exact(&self, value: ExactRational) -> ExactRational {
        value
    }
}

struct TwoComponentBest {
    q1: u64,
    q2: u64,
    value: ExactRational,
    evaluations: u64,
    pruned: u64,
}

/// `Err` carries the incumbent when the budget runs out.
fn search_two<O: TwoComponentObjective>(
    objective: &O,
    f1: u64,
    f2: u64,
    budget: u64,
) -> Result<TwoComponentBest, Option<TwoComponentBest>> {
    let mut best: Option<(u64, u64, O::Value)> = None;
    let mut evaluations = 0u64;
    let mut pruned = 0u64;
    let finish = |best: Option<(u64, u64, O::Value)>, evaluations, pruned| {
        best.map(|(q1, q2, v)| TwoComponentBest {
            q1,
            q2,
            value: objective.exact(v),
            evaluations,
            pruned,
        })
    };
    for q1 in (1..=f1).rev() {
        if let Some((_, _, incumbent)) = &best {
            if objective.bound(q1, f2) > *incumbent {
                pruned += 1;
                continue;
            }
        }
        for q2 in (1..=f2).rev() {
            if evaluations >= budget {
                return Err(finish(best, evaluations, pruned));
            }
            evaluations += 1;
            let v = objective.value(q1, q2);
            if best.as_ref().is_none_or(|(_, _, b)| v <= *b) {
                best = Some((q1, q2, v));
            }
        }
    }
    Ok(finish(best, evaluations, pruned).expect("f1, f2 >= 1"))
}
