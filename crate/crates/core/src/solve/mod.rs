//! Stationary solvers: the monotone scheme, fixed-point iteration, Perron
//! iteration between barriers, and nested-box solves on the whole space.

mod barrier;
mod iterate;
mod perron;
mod scheme;
mod unbounded;

pub use barrier::{build_barrier, distance_to_dirichlet, minimal_barrier_lambda, Barrier};
pub use iterate::{solve_fixed_point, SolveResult, TraceRow};
pub use perron::perron_solve;
pub use scheme::{
    discretize, Method, MonotoneReport, PRule, SchemeMap, SchemeParams, Violation, ViscositySide, HALF_LINE,
};
pub use unbounded::{solve_unbounded, BoxReport, UnboundedProblem, UnboundedResult};
