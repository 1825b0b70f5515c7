//! Numerical laboratory for the Laplacian coflow of invariant coclosed
//! G₂-structures on 7-dimensional almost Abelian Lie algebras.

#![allow(clippy::needless_range_loop)]

pub mod almost_abelian;
pub mod coflow;
pub mod error;
pub mod exterior;
pub mod g2core;
pub mod io;
pub mod metric_lie;
pub mod planar;
pub mod sampling;
pub mod soliton;
pub mod verify;

pub use error::{Error, Result};
pub use exterior::{EuclideanFrame, KForm};
