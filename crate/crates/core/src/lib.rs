//! Group-algebra quantum codes with copy-cup CZ/CCZ gates.
//!
//! The crate builds CSS codes as balanced (or hypergraph) products of
//! two-term group-algebra complexes, decides which labelings of a check
//! element into in/out/free parts satisfy the gate conditions, synthesizes
//! the resulting constant-depth circuits, and checks that they act
//! nontrivially on the code space.

pub mod complexes;
pub mod error;
pub mod gates;
pub mod gf2;
pub mod groups;
pub mod matching;
pub mod orientation;
pub mod search;

pub use error::{Error, Result};
