//! Integrated density of states of pattern-equivariant lattice operators,
//! approximated through finite volumes and pattern frequencies with explicit
//! error bounds.

pub mod colouring;
pub mod error;
pub mod ids;
pub mod lattice;
pub mod operator;
pub mod spectral;

pub use error::{Error, Result};
