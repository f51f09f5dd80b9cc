//! Extended Bloch groups of number fields.
//!
//! Exact arithmetic in a number field, the primitive Z-extension of its
//! multiplicative group in integer coordinates, flattenings and their
//! formal sums, the dilogarithm regulator at every complex embedding,
//! explicit torsion generators, and invariants of flattened 3-cycles.

pub mod error;
pub mod extbloch;
pub mod extgroup;
pub mod cli;
pub mod cochain;
pub mod field;
pub mod fixtures;
pub mod numeric;
pub mod poly;
pub mod regulator;
pub mod torsion;

pub use error::{Error, Result};
