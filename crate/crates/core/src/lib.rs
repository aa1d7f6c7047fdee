//! Positivity-preserving, locally divergence-free discontinuous Galerkin
//! solver for two-dimensional ideal MHD in Godunov form.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the bottom of this file fix it to `f64`, which is what the problem
//! library and the command-line driver use.

pub mod basis;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod limiters;
pub mod mesh;
pub mod physics;
pub mod problems;
pub mod quadrature;
pub mod real;
pub mod scheme;
pub mod timestep;

pub use error::{MhdError, Result};
pub use real::Real;

pub type State = physics::ConservedState<f64>;
pub type Primitive = physics::PrimitiveState<f64>;
pub type Ideal = physics::EosIdeal<f64>;
pub type Space = basis::DgSpace<f64>;
pub type Field = field::DgField<f64>;
pub type Averages = field::CellAverages<f64>;
pub type Grid = mesh::Mesh<f64>;
pub type Solver64 = timestep::Solver<f64, physics::EosIdeal<f64>>;
