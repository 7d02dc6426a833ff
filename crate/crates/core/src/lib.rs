//! Placement, bounds and estimation for movable-antenna sensing arrays.

// `!(x > 0.0)` is used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod bench;
pub mod cli;
pub mod conic;
pub mod crb;
pub mod error;
pub mod estimation;
pub mod placement1d;
pub mod placement2d;
pub mod region;

pub use error::{Error, Result};
