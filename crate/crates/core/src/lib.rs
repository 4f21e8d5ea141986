//! Grids, meshes, partitions and distributed fields on the sphere.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod field;
pub mod functionspace;
pub mod fvm;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod mesh;
pub mod meshgen;
pub mod parallel;
pub mod partition;
pub mod point;
pub mod projection;
pub mod util;

pub use error::{Error, Result};
