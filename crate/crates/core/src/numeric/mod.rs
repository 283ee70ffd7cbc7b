//! Floating-point building blocks shared by the lattice sums.

pub mod dd;
pub mod quad;
pub mod special;
pub mod sum;
pub mod trig;

pub use dd::Dd;
pub use sum::{ComplexKahanSum, KahanSum};
pub use trig::OscillatorySeries;
