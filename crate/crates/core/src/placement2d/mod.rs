//! Planar placement: the circular construction and the alternating SCA
//! optimizer for general convex regions.

mod circular;
mod sca;
pub mod surrogate;

pub use circular::{circular_from_groups, circular_optimal, rotation_schedule, RotationGroups};
pub use sca::{
    check_feasible, delta_of, initial_layout, optimize_2d, optimize_2d_restarts, uniform_grid,
    upaf_init, InitScheme, ScaConfig, ScaTrace, ScaTraceRow,
};
pub(crate) use sca::grid_side;
pub use surrogate::{build_subproblem_x, build_subproblem_y, Axis, Subproblem};
