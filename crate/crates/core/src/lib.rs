//! Lattice-embedding obstructions to quasi-alternating links.
//!
//! The pipeline: a negative definite plumbing graph bounding the branched
//! double cover of a link gives an integral lattice; every embedding of that
//! lattice into the negative diagonal lattice `-Zⁿ` is enumerated up to
//! signed coordinate permutations and tested for the unimodular-minor
//! condition that a quasi-alternating link forces. Alongside this sit
//! correction-term computations from characteristic vectors, and an exact
//! classifier for quasi-alternating pretzel links with checkable
//! determinant-additivity certificates.

pub mod dinvariants;
pub mod embedder;
pub mod exact_linalg;
pub mod obstruction;
pub mod plumbing;
pub mod pretzel;

use num_bigint::BigInt;

pub use exact_linalg::{Gram, LinalgError, Matrix, Scalar, SmithForm};

/// Arbitrary-precision integer matrix.
pub type IntMatrix = Matrix<BigInt>;
/// Arbitrary-precision symmetric intersection form.
pub type GramMatrix = Gram<BigInt>;
/// Exact rational with arbitrary-precision numerator and denominator.
pub type Rational = num_rational::Ratio<BigInt>;
/// Machine-word matrix for hot paths whose entries are provably small.
pub type SmallMatrix = Matrix<i64>;
