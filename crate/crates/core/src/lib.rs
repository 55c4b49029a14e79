//! Viscosity solutions of fully nonlinear second-order equations: proper
//! operators, semijets, comparison diagnostics, monotone schemes and
//! parabolic flows.

pub mod analysis;
pub mod analytic;
pub mod boundary;
pub mod envelope;
pub mod error;
pub mod grid;
pub mod jet;
pub mod jets;
pub mod matrix;
pub mod operator;
pub mod operators;
pub mod parabolic;
pub mod proper;
pub mod solve;

pub use boundary::{BoundarySpec, FaceBc, FaceCondition, Sense};
pub use error::{Error, Result};
pub use grid::{Face, Grid, GridFn};
pub use jet::{Jet, ParabolicJet};
pub use jets::{certify, subjet_test, superjet_test, CertReport, JetProbeConfig, Region, Side};
pub use matrix::SymMatrix;
pub use operator::{EvalFn, Modulus, OperatorSpec};
pub use proper::{check_gamma, check_proper, ProperReport, Sampler};
pub use parabolic::{mcf_evolve, DtPolicy, Evolution, Flow, FlowOperator, FlowState, TimeGrid};
pub use solve::{
    build_barrier, discretize, perron_solve, solve_fixed_point, solve_unbounded, Method, SchemeMap, SchemeParams,
    SolveResult,
};
