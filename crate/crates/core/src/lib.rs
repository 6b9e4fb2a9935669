//! Quantum dichotomies as a preordered semiring: spectral monotones
//! (sandwiched Rényi quasi-entropies), pinching maps, single-shot
//! convertibility via LP / Choi-matrix feasibility, and asymptotic rate,
//! strong-converse-exponent and work-cost formulas.
//!
//! All logarithms, divergences and rates are base 2.

pub mod error;
pub mod channel;
pub mod dichotomy;
pub mod linalg;
pub mod pinching;

pub use error::{Error, Result};
