use thiserror::Error;

use crate::model::{NodeId, Schedule, Violation};
use crate::numtheory::PosInt;
use crate::rational::ExactRational;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lcm of empty set")]
    EmptyLcm,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {}", join_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("node {0} is not a module")]
    NotAModule(NodeId),

    #[error("schedule has no cycle time for component {0}")]
    MissingCycleTime(NodeId),

    #[error("schedule names {0}, which is not a component of the instance")]
    UnexpectedScheduleEntry(NodeId),

    #[error("component {component}: cycle time {cycle_time} exceeds cycle limit {cycle_limit}")]
    Infeasible {
        component: NodeId,
        cycle_time: PosInt,
        cycle_limit: PosInt,
    },

    #[error(
        "{distinct} distinct cycle times exceed the inclusion-exclusion subset cap of {cap}; \
         use union_density or simulated_cost instead"
    )]
    SubsetCapExceeded { distinct: usize, cap: usize },

    #[error("period {period} exceeds the counting cap of {cap}")]
    PeriodCapExceeded { period: PosInt, cap: u64 },

    #[error("horizon {0} is too long to simulate")]
    HorizonTooLong(PosInt),

    #[error("search budget of {budget} evaluations exceeded; {}", describe_incumbent(.incumbent))]
    BudgetExceeded {
        budget: u64,
        incumbent: Option<Box<(Schedule, ExactRational)>>,
    },

    #[error("setup cost of {0} is negative")]
    NegativeCost(String),

    #[error("cycle limit {0} is too large to enumerate")]
    SearchSpaceTooLarge(PosInt),

    #[error("the factoring reduction needs M >= 4, got {0}")]
    TargetTooSmall(PosInt),

    #[error("input is prime: {0}")]
    InputIsPrime(PosInt),

    #[error("q2 = {q2} is outside 1..={max}")]
    OutOfRange { q2: PosInt, max: String },

    #[error("M = {target} exceeds the verification cap of {cap}")]
    VerificationCapExceeded { target: PosInt, cap: u64 },
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

fn describe_incumbent(incumbent: &Option<Box<(Schedule, ExactRational)>>) -> String {
    match incumbent.as_deref() {
        Some((schedule, value)) => format!("best incumbent {schedule} with value {value}"),
        None => "no incumbent found".to_string(),
    }
}
