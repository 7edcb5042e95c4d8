//! Finite-dimensional register algebra.
//!
//! Registers are named tensor factors; the computational basis of a
//! [`RegisterSystem`] is ordered lexicographically with the leftmost
//! register most significant, and matrices are row-major in that basis.

mod channel;
mod random;
mod register;
mod state;
mod unitary;

pub use channel::ChannelOp;
pub use random::{complex_gaussian, ginibre, haar_random_unitary, haar_unitary_matrix, rng_from_seed};
pub use register::{Holder, Register, RegisterSystem};
pub use state::{
    canonical_classical_purification, canonical_classical_purification_with, DensityOperator,
    JointDistribution, StateVector,
};
pub use unitary::{gates, UnitaryOp};
