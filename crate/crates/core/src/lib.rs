//! Local optima of the Sherrington–Kirkpatrick Hamiltonian.
//!
//! * [`gaussian`]: scalar normal primitives and `φ = log 2Φ`.
//! * [`rate`]: the Legendre transform `μ*`, `λ*`, `R_c` and the constants `v*`, `α*`.
//! * [`sk`]: instances, local fields, greedy descent, exhaustive enumeration, MaxCut.
//! * [`landscape`]: exact local-optimality probability, half-normal sum
//!   densities, exponential moments, tails and the conditional energy law.
//! * [`selfcheck`]: the aggregated invariant suite.

pub mod error;
pub mod gaussian;
pub mod landscape;
pub mod quadrature;
pub mod rate;
pub mod rng;
pub mod selfcheck;
pub mod sk;

pub use error::{Error, Result};
