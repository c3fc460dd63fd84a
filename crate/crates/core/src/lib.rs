//! Solvers for general variational inequalities
//! `<T(u), g(v) − g(u)> >= 0 for all g(v) ∈ K`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auxiliary;
pub mod convexity;
pub mod banded;
pub mod bench;
pub mod equilibrium;
pub mod error;
pub mod obstacle;
pub mod problem;
pub mod sets;
pub mod solvers;
pub mod wiener_hopf;

pub use error::{GviError, Result};
pub use problem::{
    operator, quasi_to_general, AlphaSchedule, ComplementarityGap, DynamicalVariant, GviProblem, Norm, Operator,
    SolveConfig, SolveReport, StepDenominator, TraceRecord, TwoStepScheme,
};
pub use sets::{project_intersection, ConvexSet};
