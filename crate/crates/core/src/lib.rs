//! Generalized dark states of an atomic ensemble with an optical transition
//! `F_g -> F_e` coupled to two quantized circularly polarized photon modes.
//!
//! The crate is organized bottom-up:
//!
//! - [`angular`]: exact Clebsch-Gordan coefficients and the decomposition of a
//!   transition into Λ, N± and V chains of dipole-connected Zeeman substates.
//! - [`fockspace`]: occupation-number bases, operator polynomials with Bose or
//!   Fermi normal ordering, and sparse matrices over enumerated bases.
//! - [`model`]: the free Hamiltonians and the atom-photon coupling, plus their
//!   projections onto single chains.
//! - [`gds`]: the operator recipes that build dark states.
//! - [`oracle`]: brute-force null-space verification of darkness.
//! - [`filtersim`]: quantum-jump trajectories of a single-atom "quantum filter".
//!
//! Data-parallel loops (matrix columns, oracle blocks, trajectories) run on
//! rayon when the `parallel` feature is enabled; see [`par::Execution`].

pub mod angular;
pub mod error;
pub mod filtersim;
pub mod fockspace;
pub mod gds;
pub mod model;
pub mod oracle;
pub mod par;

pub use angular::{clebsch_gordan, decompose_chains, Chain, ChainKind, ExactCG, HalfInt};
pub use error::{Error, Result};
pub use fockspace::{
    Algebra, Basis, FermiOrdering, ModeId, ModeSpace, OperatorPolynomial, Polarization, SectorSpec,
    SparseOperator, StateVector, Statistics,
};
pub use model::ModelConfig;
pub use par::Execution;

/// Version tag written into every JSON document emitted by the crate.
pub const SCHEMA_VERSION: u32 = 1;
