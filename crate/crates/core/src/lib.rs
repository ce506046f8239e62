//! Fibre beam elements with adaptive shape functions for nonlinear RC frame analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod bench;
pub mod element;
pub mod error;
pub mod kernel;
pub mod materials;
pub mod model_io;
pub mod plot;
pub mod quadrature;
pub mod reference;
pub mod section;
pub mod solver;

pub use error::{FsdbError, Result};
