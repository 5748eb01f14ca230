//! Route planning for trucks with several hoppers delivering bulk feed.
//!
//! The crate builds plans with a cheapest-insertion constructor, improves
//! them with simulated annealing and, for small single-day instances, solves
//! them exactly so the heuristics can be checked.

pub mod annealing;
pub mod cost;
pub mod error;
pub mod feasibility;
pub mod insertion;
pub mod io;
pub mod loading;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod par;
pub mod plan;
pub mod synth;

pub use annealing::{anneal, anneal_restarts, AnnealOutcome, AnnealParams};
pub use cost::{evaluate_cost, CostBreakdown};
pub use error::{StructuralError, ValidationError};
pub use feasibility::{check_feasibility, is_feasible, Violation, ViolationKind};
pub use insertion::{build_initial, BuildReport, InsertionParams};
pub use model::{Instance, InstanceData};
pub use objective::{compare, objective_of, scalarize, Objective};
pub use oracle::{solve_exact, OracleLimits, OracleMode};
pub use par::Execution;
pub use plan::{DayPlan, HopperAssignment, Journey, Plan};
