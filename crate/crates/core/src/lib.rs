//! Numerical laboratory for bipartite quantum communication protocols.
//!
//! The crate simulates protocols in the pre-shared-entanglement model
//! (a pure state shared by Alice and Bob, followed by alternating local
//! unitaries that emit communication registers), and evaluates on them
//! the quantum communication cost, the quantum information cost, and the
//! error against a target channel. On top of that it builds derived
//! protocols (parallel composition, input freezing, coherent mixtures and
//! the disjointness-to-AND averaging reduction) so the exact identities
//! relating their costs can be checked numerically.
//!
//! All states are simulated as global pure vectors; mixed states appear
//! only as reductions. Entropies are in bits.

pub mod classical;
pub mod constructions;
pub mod error;
pub mod fuzz;
pub mod hilbert;
pub mod linalg;
pub mod measures;
pub mod protocol;
pub mod redistribution;

pub use error::{Error, Result};
pub use hilbert::{
    ChannelOp, DensityOperator, Holder, Register, RegisterSystem, StateVector, UnitaryOp,
};
pub use measures::{cond_entropy, cond_mutual_info, entropy, mutual_info, trace_distance};
pub use protocol::{ProtocolInput, ProtocolSpec, QuantumTask, Step, Trajectory};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Numerical tolerances. Defaults follow the values the checks are pinned to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Normalisation of states and traces.
    pub norm: f64,
    /// Hermiticity of density operators.
    pub herm: f64,
    /// Unitarity, `U^dagger U = I` entrywise.
    pub unit: f64,
    /// Most negative eigenvalue accepted as rounding noise.
    pub psd: f64,
    /// Generic equality of states and scalars.
    pub eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: 1e-9,
            herm: 1e-9,
            unit: 1e-9,
            psd: 1e-9,
            eq: 1e-8,
        }
    }
}

impl Tolerances {
    /// Same tolerance for every gate, handy for loosening all of them at once.
    pub fn uniform(tol: f64) -> Self {
        Self {
            norm: tol,
            herm: tol,
            unit: tol,
            psd: tol,
            eq: tol.max(1e-8),
        }
    }
}
