//! Dark-bright soliton dynamics in a one-dimensional two-component
//! Bose-Einstein condensate.
//!
//! The crate is split along the simulation pipeline:
//!
//! * [`grid`]: lattice, quadrature and spectral operators.
//! * [`meanfield`]: coupled Gross-Pitaevskii relaxation and propagation.
//! * [`soliton`]: dark-bright soliton ansatz and the trapped imprint solver.
//! * [`fock`]: exact few-body dynamics in a truncated mode basis.
//! * [`diagnostics`]: densities, natural orbitals, Schmidt spectra,
//!   coherence, fragment tracking and centre-of-mass checks.
//! * [`io`]: configuration, snapshots, CSV output and run orchestration.

// `!(x > 0.0)` is used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod fock;
pub mod grid;
pub mod io;
pub mod meanfield;
pub mod soliton;

pub use error::{Error, Result};

/// Component label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Species {
    Dark,
    Bright,
}

impl Species {
    pub fn tag(self) -> &'static str {
        match self {
            Species::Dark => "D",
            Species::Bright => "B",
        }
    }
}

pub use num_complex::Complex64 as C64;
