//! Finitely convergent overrelaxed projection methods for convex feasibility
//! problems.
//!
//! The problem is to find `x ∈ Q ∩ C` where `C = ⋂ C_i` is an intersection of
//! closed convex sets, each given as the fixed-point set of a cutter `T_i`
//! (a metric projection or a subgradient projection). The iteration
//!
//! ```text
//! x_{k+1} = P_Q( x_k + α_[k] Σ_{i ∈ I_k} λ_{i,k} β_{i,k} (T_i(x_k) − x_k) )
//! ```
//!
//! extends every nonzero cutter step by `r_[k] / φ_i(x_k)`, where `[k]` counts
//! the correction steps taken so far. With a well-matched control `I_k`, a
//! Slater point and `Σ α_k r_k = ∞` the iterates land in `C ∩ Q` after finitely
//! many steps.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the trace CSV
//! and the command-line front end live in the `feasik` crate.
#![no_std]
// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod certificates;
pub mod controls;
mod error;
pub mod engine;
pub mod function;
pub mod instances;
pub mod operators;
pub mod problem;
pub mod schedules;
pub mod vector;

pub use error::Error;

pub use certificates::{DescentCertificate, ReproductionReport};
pub use controls::{Control, ControlSpec, RepetitiveRule};
pub use engine::{RunConfig, RunResult, RunStatus, Solver, TraceRecord, UpdateForm};
pub use function::ConvexFunction;
pub use operators::{Cutter, CutterEval};
pub use problem::{Body, CertifiedInterior, Constraint, CutterKind, OuterSet, Problem};
pub use schedules::{
    CorrectionCounter, CounterMode, OverrelaxationSchedule, PhiFunctional, RelaxationSchedule,
    WeightRule,
};
pub use vector::Vector;

pub type Result<T, E = Error> = core::result::Result<T, E>;
