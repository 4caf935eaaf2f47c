//! Exact classical evaluation of Fourier-lattice kernels reweighted by
//! matrix product states.
//!
//! The kernels considered here are
//! `K(x, x') = Σ_ω w[ω]² cos⟨ω, x - x'⟩ / Σ_ω w[ω]²`, summed over one
//! representative of every mirror pair of a Cartesian-product frequency
//! lattice. The lattice grows exponentially with the input dimension, but
//! when the weighting is a symmetric matrix product state the kernel is a
//! ratio of two MPS contractions and costs `O(d D³ M̃)` to evaluate.
//!
//! Modules:
//! - [`lattice`]: frequency axes, lattices, multi-indices and mirror splitting.
//! - [`mps`]: MPS weightings, symmetrization, copy-tensor products, norms and
//!   exact sampling.
//! - [`kernel`]: the contraction engine, its ETK ordering, Gram matrices and
//!   brute-force oracles.
//! - [`regression`]: kernel ridge regression and the random Fourier feature
//!   baseline.
//! - [`pqc`]: a small statevector simulator and Fourier-span checks for
//!   parameterized circuits.

pub mod error;
pub mod kernel;
pub mod lattice;
pub mod linalg;
pub mod mps;
pub mod pqc;
pub mod regression;

pub use error::{Error, Result};
pub use kernel::{DenseOracle, KernelEngine};
pub use lattice::{FrequencyAxis, FrequencyLattice, LatticeSpec, MultiIndex, Splitting};
pub use mps::WeightMps;
pub use num_complex::Complex64;

/// Crate version, embedded in CLI artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
