//! Factoring integers with an exact solver for two-component instances.
//!
//! For a composite `M ≥ 4` the instance `FCMJ_M` has one module of cost 1
//! over two components:
//!
//! | component | setup cost       | cycle limit |
//! |-----------|------------------|-------------|
//! | 1         | `M²(M−1) − 1`    | `M`         |
//! | 2         | `0`              | `M − 2`     |
//!
//! Component 1 is so expensive that every optimum runs it at `q1 = M`.
//! What remains for component 2 is `V(q2) = 1/q2 − 1/lcm(M, q2)`, which no
//! `q2` coprime to `M` can bring down to `1/M`, while `q2 = M − a` for any
//! factor `a` of `M` reaches it. So `gcd(q2, M)` of the optimum is a proper
//! divisor, and recursing on `d` and `M/d` factors `M` completely.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{Instance, NodeId};
use crate::numtheory::{gcd, gcd_u64, is_prime, lcm, PosInt};
use crate::rational::ExactRational;
use crate::solver::{two_component_instance, SolverConfig};

/// Largest `M` [`verify_reduction`] accepts by default.
pub const DEFAULT_VERIFY_CAP: u64 = 10_000;

/// Setup costs and cycle limits of `FCMJ_M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoringParams {
    pub k0: ExactRational,
    pub k1: ExactRational,
    pub k2: ExactRational,
    pub f1: PosInt,
    pub f2: PosInt,
}

impl FactoringParams {
    pub fn new(m: &PosInt) -> Result<Self, Error> {
        let mv = m.get();
        if *mv < BigUint::from(4u32) {
            return Err(Error::TargetTooSmall(m.clone()));
        }
        let k1 = mv * mv * (mv - 1u32) - 1u32;
        Ok(FactoringParams {
            k0: ExactRational::one(),
            k1: ExactRational::from_integer(k1),
            k2: ExactRational::zero(),
            f1: m.clone(),
            f2: PosInt::new(mv - 2u32).expect("M >= 4"),
        })
    }

    pub fn instance(&self) -> Instance {
        two_component_instance(&self.k0, &self.k1, &self.k2, &self.f1, &self.f2)
    }
}

/// The `FCMJ_M` instance. Needs `M ≥ 4`.
pub fn build_factoring_instance(m: &PosInt) -> Result<Instance, Error> {
    Ok(FactoringParams::new(m)?.instance())
}

/// `V(q2) = 1/q2 − 1/lcm(M, q2)` for `1 ≤ q2 ≤ M − 2`.
pub fn step2_objective(m: &PosInt, q2: &PosInt) -> Result<ExactRational, Error> {
    let in_range = m.get() >= &BigUint::from(3u32) && q2.get() + 2u32 <= *m.get();
    if !in_range {
        return Err(Error::OutOfRange {
            q2: q2.clone(),
            max: if m.get() >= &BigUint::from(3u32) {
                (m.get() - 2u32).to_string()
            } else {
                "(empty)".to_string()
            },
        });
    }
    let l = lcm([m, q2])?;
    Ok(ExactRational::recip_of(q2) - ExactRational::recip_of(&l))
}

/// One solved split of a composite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub params: FactoringParams,
    pub q1: PosInt,
    pub q2: PosInt,
    pub divisor: PosInt,
    pub evaluations: u64,
}

/// Solves `FCMJ_M` and reads off `gcd(q2, M)`.
pub fn split(m: &PosInt, config: &SolverConfig) -> Result<Split, Error> {
    let params = FactoringParams::new(m)?;
    if is_prime(m) {
        return Err(Error::InputIsPrime(m.clone()));
    }
    let report = config.solve_two_component(&params.k0, &params.k1, &params.k2, &params.f1, &params.f2)?;
    let q1 = report.optimal_schedule.get(&NodeId::from("1")).expect("component 1").clone();
    let q2 = report.optimal_schedule.get(&NodeId::from("2")).expect("component 2").clone();
    let divisor = gcd(&q2, m);
    assert!(
        q1 == *m && !divisor.is_one() && divisor != *m,
        "FCMJ_{m} optimum ({q1}, {q2}) gave trivial divisor {divisor}"
    );
    Ok(Split {
        params,
        q1,
        q2,
        divisor,
        evaluations: report.evaluations,
    })
}

/// A proper divisor `1 < d < M` of the composite `M`.
pub fn find_nontrivial_divisor(m: &PosInt) -> Result<PosInt, Error> {
    find_nontrivial_divisor_with(m, &SolverConfig::default())
}

pub fn find_nontrivial_divisor_with(m: &PosInt, config: &SolverConfig) -> Result<PosInt, Error> {
    Ok(split(m, config)?.divisor)
}

/// How a number was broken down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorTrace {
    /// `M = 1`, the empty product.
    Unit { target: PosInt },
    Prime { target: PosInt },
    Split {
        target: PosInt,
        /// The `FCMJ_M` instance handed to the solver.
        instance: Instance,
        /// Optimal `(q1, q2)`.
        solved: (PosInt, PosInt),
        divisor: PosInt,
        /// Traces of `divisor` and `target / divisor`.
        children: Box<[FactorTrace; 2]>,
    },
}

impl FactorTrace {
    pub fn target(&self) -> &PosInt {
        match self {
            FactorTrace::Unit { target }
            | FactorTrace::Prime { target }
            | FactorTrace::Split { target, .. } => target,
        }
    }

    /// Prime leaves, unsorted.
    pub fn leaves(&self) -> Vec<PosInt> {
        match self {
            FactorTrace::Unit { .. } => Vec::new(),
            FactorTrace::Prime { target } => vec![target.clone()],
            FactorTrace::Split { children, .. } => {
                children.iter().flat_map(FactorTrace::leaves).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factorization {
    /// Prime factors in ascending order, with multiplicity.
    pub factors: Vec<PosInt>,
    pub trace: FactorTrace,
}

/// Prime factorization of `M`, each split found by solving `FCMJ_M`.
pub fn factorize(m: &PosInt) -> Result<Factorization, Error> {
    factorize_with(m, &SolverConfig::default())
}

pub fn factorize_with(m: &PosInt, config: &SolverConfig) -> Result<Factorization, Error> {
    let trace = trace(m, config)?;
    let mut factors = trace.leaves();
    factors.sort();
    Ok(Factorization { factors, trace })
}

fn trace(m: &PosInt, config: &SolverConfig) -> Result<FactorTrace, Error> {
    if m.is_one() {
        return Ok(FactorTrace::Unit { target: m.clone() });
    }
    if is_prime(m) {
        return Ok(FactorTrace::Prime { target: m.clone() });
    }
    let s = split(m, config)?;
    let cofactor = PosInt::new(m.get() / s.divisor.get()).expect("divisor < M");
    let children = Box::new([trace(&s.divisor, config)?, trace(&cofactor, config)?]);
    Ok(FactorTrace::Split {
        target: m.clone(),
        instance: s.params.instance(),
        solved: (s.q1, s.q2),
        divisor: s.divisor,
        children,
    })
}

/// Exhaustive check of both proof steps on one `M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub target: PosInt,
    pub composite: bool,
    /// `q1 = M` beats every `q1 < M` by the stated margins.
    pub step1_ok: bool,
    /// (min of U over q1 ≤ M−1, U at q1 = M and the solver's q2).
    pub step1_margin: (ExactRational, ExactRational),
    /// Every q2 coprime to M has V(q2) > 1/M. `None` for prime M, where the
    /// claim has no content.
    pub lemma_ok: Option<bool>,
    pub coprime_min_v: ExactRational,
    /// Exhaustive minimum of V over 1 ≤ q2 ≤ M−2.
    pub optimal_v: ExactRational,
    pub solver_q1: PosInt,
    pub solver_q2: PosInt,
    /// V at the solver's q2 equals the exhaustive minimum.
    pub solver_optimal: bool,
    /// gcd(q2, M) for composite M.
    pub divisor: Option<PosInt>,
    pub divisor_ok: Option<bool>,
}

impl ReductionReport {
    pub fn all_ok(&self) -> bool {
        self.step1_ok
            && self.solver_optimal
            && self.lemma_ok.unwrap_or(true)
            && self.divisor_ok.unwrap_or(true)
    }
}

/// `(num, den)` of U(q1, q2) = M²(M−1)/q1 + 1/q2 − 1/lcm(q1, q2).
fn u_value(m2m1: u128, q1: u64, q2: u64) -> (u128, u128) {
    let g = gcd_u64(q1, q2);
    let l = u128::from(q1 / g) * u128::from(q2);
    (m2m1 * (l / u128::from(q1)) + l / u128::from(q2) - 1, l)
}

fn less(a: (u128, u128), b: (u128, u128)) -> bool {
    a.0 * b.1 < b.0 * a.1
}

/// Checks, by exhaustive evaluation, that `q1 = M` is forced and that the
/// solved `q2` shares a proper factor with `M`. Quadratic in `M`.
pub fn verify_reduction(m: &PosInt) -> Result<ReductionReport, Error> {
    verify_reduction_with(m, DEFAULT_VERIFY_CAP, &SolverConfig::default())
}

pub fn verify_reduction_with(
    m: &PosInt,
    cap: u64,
    config: &SolverConfig,
) -> Result<ReductionReport, Error> {
    let params = FactoringParams::new(m)?;
    // The u128 arithmetic below is exact up to M ≈ 10⁶; the cap keeps the
    // quadratic sweep bounded well before that.
    let mv = m
        .to_u64()
        .filter(|v| *v <= cap && *v <= 1_000_000)
        .ok_or_else(|| Error::VerificationCapExceeded {
            target: m.clone(),
            cap,
        })?;
    let composite = !is_prime(m);

    let report = config.solve_two_component(&params.k0, &params.k1, &params.k2, &params.f1, &params.f2)?;
    let solver_q1 = report.optimal_schedule.get(&NodeId::from("1")).expect("component 1").clone();
    let solver_q2 = report.optimal_schedule.get(&NodeId::from("2")).expect("component 2").clone();
    let q2_star = solver_q2.to_u64().expect("q2 <= M");

    // Step 1: every q1 < M is worse than q1 = M.
    let m2m1 = u128::from(mv) * u128::from(mv) * u128::from(mv - 1);
    let mut lowest: Option<(u128, u128)> = None;
    for q1 in 1..mv {
        for q2 in 1..=mv - 2 {
            let u = u_value(m2m1, q1, q2);
            if lowest.is_none_or(|lo| less(u, lo)) {
                lowest = Some(u);
            }
        }
    }
    let lowest = lowest.expect("M >= 4");
    let lowest = ExactRational::new(lowest.0, lowest.1).expect("positive");
    let at_m = u_value(m2m1, mv, q2_star);
    let at_m = ExactRational::new(at_m.0, at_m.1).expect("positive");
    let m_sq = ExactRational::from(mv * mv);
    let step1_ok = solver_q1 == *m
        && lowest >= m_sq
        && at_m <= ExactRational::from(mv * mv - mv + 1)
        && at_m < lowest;

    // Step 2: sweep V.
    let one_over_m = ExactRational::recip_of(m);
    let mut coprime_min: Option<ExactRational> = None;
    let mut optimal_v: Option<ExactRational> = None;
    for q2 in 1..=mv - 2 {
        let v = step2_objective(m, &PosInt::from(q2))?;
        if gcd_u64(q2, mv) == 1 && coprime_min.as_ref().is_none_or(|c| v < *c) {
            coprime_min = Some(v.clone());
        }
        if optimal_v.as_ref().is_none_or(|o| v < *o) {
            optimal_v = Some(v);
        }
    }
    let coprime_min_v = coprime_min.expect("q2 = 1 is coprime");
    let optimal_v = optimal_v.expect("M >= 4");
    let solver_optimal = step2_objective(m, &solver_q2)? == optimal_v;

    let lemma_ok = composite.then(|| coprime_min_v > one_over_m);
    let divisor = composite.then(|| gcd(&solver_q2, m));
    let divisor_ok = divisor.as_ref().map(|d| !d.is_one() && d != m);

    Ok(ReductionReport {
        target: m.clone(),
        composite,
        step1_ok,
        step1_margin: (lowest, at_m),
        lemma_ok,
        coprime_min_v,
        optimal_v,
        solver_q1,
        solver_q2,
        solver_optimal,
        divisor,
        divisor_ok,
    })
}
