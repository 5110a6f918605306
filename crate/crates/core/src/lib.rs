//! Symmetry groups `G_{alpha,m} ⊂ O(n)` with sign homomorphisms, their
//! binary-code invariants, configuration enumeration and a discretized
//! variational solver for sign-changing equivariant solutions.

pub mod checks;
pub mod codes;
pub mod config;
pub mod enumerate;
pub mod error;
pub mod group;
pub mod layout;
pub mod variational;

pub use config::{Regime, SymmetryConfig};
pub use error::{Error, Result};
pub use group::{GroupElement, SymmetryGroup};
pub use layout::CoordinateLayout;
