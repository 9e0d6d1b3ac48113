//! Exact tools for frequency-constrained maintenance jobs on hierarchical
//! systems.
//!
//! A system is a tree of modules with components at the leaves. Each
//! component `c` is maintained at every multiple of its cycle time
//! `q_c ≤ f_c`, paying `K_c`; a module pays `K_m` once in every period where
//! at least one of its triggering components is maintained. The crate
//!
//! * evaluates the long-run cost rate of a schedule exactly ([`objective`]),
//! * finds the optimal schedule by branch and bound ([`solver`]),
//! * factors integers by solving two-component instances ([`reduction`]).
//!
//! All cost values are exact rationals; nothing that decides optimality
//! touches floating point.
//!
//! ```
//! use fcmj::prelude::*;
//!
//! let instance = InstanceBuilder::new("0")
//!     .module("0", 3)
//!     .component("1", 2, 5)
//!     .component("2", 1, 6)
//!     .edge("0", "1")
//!     .edge("0", "2")
//!     .build();
//! let schedule: Schedule = [("1", 4), ("2", 6)].into_iter().collect();
//! assert_eq!(cost_rate(&instance, &schedule)?.total.to_string(), "5/3");
//!
//! let best = solve_exact(&instance)?;
//! assert_eq!(best.optimal_value.to_string(), "6/5");
//!
//! let fifteen = factorize(&PosInt::from(15))?;
//! assert_eq!(fifteen.factors, vec![PosInt::from(3), PosInt::from(5)]);
//! # Ok::<(), fcmj::Error>(())
//! ```

mod error;
pub mod model;
pub mod numtheory;
pub mod objective;
pub mod rational;
pub mod reduction;
pub mod solver;

pub use error::Error;

pub mod prelude {
    pub use crate::error::Error;
    pub use crate::model::{
        trigger_set, validate, Instance, InstanceBuilder, NodeId, Schedule, TriggerMode,
    };
    pub use crate::numtheory::{gcd, is_prime, lcm, PosInt};
    pub use crate::objective::{cost_rate, module_cost_rate, simulated_cost, union_density, CostBreakdown};
    pub use crate::rational::ExactRational;
    pub use crate::reduction::{
        build_factoring_instance, factorize, find_nontrivial_divisor, step2_objective,
        verify_reduction, FactorTrace, ReductionReport,
    };
    pub use crate::solver::{partial_lower_bound, solve_exact, solve_two_component, SolveReport, SolverConfig};
}

// The guide in book/ is compiled into doc-tests so its snippets stay honest.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/cost-rate.md")]
    mod cost_rate {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/factoring.md")]
    mod factoring {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
