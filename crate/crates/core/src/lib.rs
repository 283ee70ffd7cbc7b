//! Lattice points in thin elliptic annuli.
//!
//! Counting, smoothed dual-lattice approximants, ensemble statistics,
//! Diophantine diagnostics and the Epstein zeta function for the
//! rectangular lattice `⟨1, iα⟩` and its dual `⟨1, i/α⟩`.

pub mod counting;
pub mod diophantine;
mod error;
pub mod lattice;
pub mod numeric;
pub mod smoothing;
pub mod stats;
pub mod zeta;

pub use error::{Error, Result};
pub use lattice::{EllipseLattice, Side};
