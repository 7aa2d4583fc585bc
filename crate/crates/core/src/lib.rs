//! Stochastic alternating linearization for `F(x) = f0(x) + Σ f_i(x)`.
//!
//! Each round keeps the strongly convex regularizer `f0` and one loss `f_j`
//! exact, replaces the other losses by stored first-order minorants, and
//! solves the small subproblem that results. The method has no step size to
//! tune and only needs every component to be visited infinitely often.
//!
//! The crate holds the centralized solver ([`engine`]), simulators for the
//! federated and token-passing variants ([`distributed`]), the comparison
//! methods used in the benchmarks ([`baselines`]), a ground-truth solver
//! ([`reference`]) and the Monte Carlo harness ([`bench`]).

mod apg;
pub mod baselines;
pub mod bench;
pub mod distributed;
pub mod engine;
mod error;
pub mod io;
pub mod linalg;
pub mod parallel;
pub mod problem;
pub mod reference;
pub mod schedule;
pub mod subproblem;
pub mod trace;

pub use engine::{run, run_observed, SolverState, StepInfo};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use problem::{CompositeProblem, LossComponent, LossKind, Regularizer};
pub use reference::{solve_reference, Reference, ReferenceMethod};
pub use schedule::{IndexSchedule, IndexStream, ScheduleKind, TransitionMatrix};
pub use subproblem::{optimality_residual, solve_subproblem, InnerOptions, SubproblemSolution};
pub use trace::{Observation, RunTrace, TraceRecord};
