//! Numerical laboratory for the four activable bound entangled states of an
//! even number of qubits and the two-bit data hiding scheme built on them.
//!
//! * [`linalg`]: dense multi-qubit operators, partial trace/transpose, a
//!   Jacobi eigensolver and distance measures.
//! * [`family`]: the state family, dense (Bell-pair recursion) and sparse
//!   (GHZ ensemble), plus the label algebra.
//! * [`analysis`]: structural checks (symmetry, ignorance, PPT, Pauli links).
//! * [`measurement`]: Born-rule sampling, Bell measurements and adaptive
//!   local strategies.
//! * [`protocols`]: hiding, global reveal and the attack simulators.

pub mod analysis;
pub mod error;
pub mod family;
pub mod linalg;
pub mod measurement;
pub mod protocols;
pub mod rng;

pub use error::{Error, Result};
pub use family::{compose, BellLabel, GhzEnsemble, StateLabel};
pub use linalg::{DensityMatrix, Operator, QubitSubset, DEFAULT_EIG_TOL, DEFAULT_TOL};
pub use protocols::{AttackReport, HiddenInstance, Representation};

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
