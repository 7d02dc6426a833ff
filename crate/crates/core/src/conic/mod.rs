//! Small dense conic programs: linear objective, linear, convex-quadratic and
//! rotated-cone constraints, solved by a primal barrier method.

mod program;
mod solver;

pub use program::{ConicProgram, Constraint, ConstraintValue};
pub use solver::{
    feasibility_phase, solve, solve_with, Feasibility, KktResiduals, SolveResult, SolveStatus,
    SolverSettings,
};
