//! Stochastic three-block alternating minimization (STAM) for problems of the form
//! `F(x) + G(y) + H(x, y)`, where `G` is a smooth finite sum, `H` a smooth coupling
//! and `F` a prox-friendly (possibly nonconvex) term such as the indicator of the
//! set of per-layer binary weights.
//!
//! The crate also ships the usual binary-network baselines (projected SGD,
//! BinaryConnect, BinaryRelax), a handful of test problems and the diagnostics
//! needed to check expected-smoothness bounds, step-size thresholds and
//! stationarity along a run.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod problems;
pub mod quantization;
pub mod sampling;
pub mod solvers;

pub use error::{Result, StamError};
pub use model::{
    evaluate_phi, full_gradient_g, ExtReal, ParamSchedule, ProblemInstance, SmoothnessProfile,
    SolverState,
};
pub use quantization::{QuantizedPoint, QuantizedSpace};
pub use sampling::{RngStream, SampleBatch};
