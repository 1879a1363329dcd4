//! Fermionic tree expansions: exterior-algebra amplitude recursion, Grassmann
//! Gaussian integrals and the amplitude bounds built on them.

pub mod error;
pub mod exterior;
pub mod grassmann;
pub mod lattice;
pub mod trees;
pub mod amplitude;
pub mod random;
pub mod bounds;
pub mod expansion;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
