//! Numerics for g-gapped bosonic quantum codes on truncated Fock spaces.
//!
//! A single-mode bosonic code is *g-gapped* when its codewords are supported
//! only on Fock states |n + g·k⟩; the gap g buys resilience against
//! number-shift errors at the cost of sensitivity to rotation (dephasing)
//! errors. This crate provides the machinery to quantify that trade-off:
//!
//! - [`fock`] — dense linear algebra over truncated (multi-)mode Fock spaces:
//!   states, Hermitian operators, tensor products, spectra, trace norms.
//! - [`channels`] — Gaussian dephasing (elementwise and quadrature forms),
//!   bosonic amplitude damping, qubit dephasing, convex mixtures, and the
//!   modular recovery map.
//! - [`codes`] — g-gapped code construction and validation: binomial codes,
//!   the kernel-based construction for number-shift error sets, and a
//!   numerical Knill–Laflamme checker.
//! - [`nogo`] — non-existence bounds for approximate error correction under
//!   Gaussian dephasing: lattice sums, geometric relaxations, thresholds,
//!   and empirical verification against direct trace-norm computation.
//! - [`binomial`] — achievable-error bounds for binomial codes under
//!   Gaussian dephasing, optimized over code distance and integration
//!   window.
//! - [`capacity`] — hashing-rate lower bounds on the quantum capacity of
//!   mixed dephasing/damping noise via an effective qubit reduction.

pub mod binomial;
pub mod capacity;
pub mod channels;
pub mod codes;
pub mod fock;
pub mod nogo;

mod math;
mod quadrature;

pub use fock::{FockError, FockVector, HermitianOperator, TruncationConfig};
