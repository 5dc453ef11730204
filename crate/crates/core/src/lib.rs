//! Generalized rank invariants, generalized persistence diagrams and interval
//! decompositions of persistence modules indexed by finite intervals of `Z^2`.
//!
//! The generalized rank over an interval `I` is computed from the zigzag module
//! obtained by restricting the module to the boundary cap of `I` (see
//! [`zigzag`] and [`rank`]). An independent limit-to-colimit computation over
//! the whole of `I` (see [`module`]) is kept alongside as an oracle.

pub mod decomp;
pub mod error;
pub mod filtration;
pub mod gen;
pub mod grid;
pub mod linalg;
pub mod module;
pub mod rank;
pub mod samples;
pub mod zigzag;

pub use error::{Error, Result};
pub use grid::{CapVariant, GridInterval, GridPoint, ZigzagPath};
pub use linalg::{Matrix, PrimeField};
pub use module::ExplicitModule;
pub use zigzag::ZigzagModule;
