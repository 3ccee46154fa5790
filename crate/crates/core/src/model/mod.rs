//! The three-block problem abstraction shared by every solver.

mod problem;
mod schedule;
mod smoothness;
mod state;

pub use problem::{
    evaluate_phi, full_gradient_g, Coupling, ExtReal, FiniteSum, ProblemInstance,
    QuadraticCoupling, Regularizer, ZeroRegularizer,
};
pub use schedule::ParamSchedule;
pub use smoothness::SmoothnessProfile;
pub use state::SolverState;
