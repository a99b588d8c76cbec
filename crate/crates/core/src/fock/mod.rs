//! Exact few-body dynamics of the two-species Hamiltonian in a fixed,
//! truncated single-particle basis.
//!
//! The many-body state lives in the number-state basis of both species;
//! the Hamiltonian is kept in Kronecker-factorized form (and as a CSR matrix
//! for moderate dimensions) and propagated with an adaptive Lanczos scheme.

mod basis;
mod hamiltonian;
mod krylov;
mod modes;
mod parity;
mod state;

pub use basis::{species_dimension, FockBasis, HopTables, SpeciesBasis, DIMENSION_CAP};
pub use hamiltonian::{
    assemble_hamiltonian, hop_matrix, ContactIntegrals, HamiltonianMatrix, CSR_LIMIT, CSR_TRIPLET_LIMIT,
};
pub use krylov::{krylov_evolve, propagate_krylov, propagate_krylov_with, KrylovOptions, KrylovStats};
pub use modes::{harmonic_function, ModeBasis, ModeProvenance, SpeciesModes};
pub use parity::{parity_expectation, DENSE_PARITY_LIMIT};
pub use state::{embed_mean_field, product_state, species_one_body_matrix, ManyBodyState, MAX_PROJECTION_DEFICIT};
