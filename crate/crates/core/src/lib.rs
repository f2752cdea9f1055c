//! Low-cycle-fatigue reliability and shape optimization for linear elastic
//! components under cyclic load.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod elasticity;
pub mod error;
pub mod geometry;
pub mod io;
pub mod life;
pub mod material;
pub mod reliability;
mod roots;
pub mod shapeopt;

pub use error::{Error, Result};
pub use life::Life;
