pub mod discretization;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod integrators;
pub mod oscillatory;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod stencil;
pub mod twoscale;

pub use error::{Error, Result};
