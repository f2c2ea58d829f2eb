pub mod applications;
pub mod catalog;
pub mod cli;
pub mod combinatorics;
pub mod curvature;
pub mod delta;
pub mod error;
pub mod extrinsic;
pub mod expr;
pub mod geometry;
pub mod lagrangian;
pub mod report;
pub mod spec;
pub mod linalg;

pub use error::{Error, Result};
