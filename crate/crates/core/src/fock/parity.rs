use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::basis::SpeciesBasis;
use super::modes::{ModeBasis, SpeciesModes};
use super::state::ManyBodyState;
use crate::error::{Error, Result};
use crate::Species;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Species dimension above which the general (non-diagonal) parity route is refused.
pub const DENSE_PARITY_LIMIT: usize = 2000;

/// Fock-space representation of a one-body map `a†_i → Σ_j Γ_ji a†_j`.
fn fock_representation(basis: &SpeciesBasis, gamma: &[Vec<C64>]) -> Result<DMatrix<C64>> {
    let dim = basis.dim();
    if dim > DENSE_PARITY_LIMIT {
        return Err(Error::Capacity {
            dimension: dim as u128,
            cap: DENSE_PARITY_LIMIT as u128,
            detail: "parity with modes of indefinite parity".into(),
        });
    }
    let m = basis.n_modes();
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for col in 0..dim {
        let cfg = basis.config(col);
        // expand Π_i (Σ_j Γ_ji a†_j)^{n_i} |0⟩ / √(Π n_i!)
        let mut terms: HashMap<Vec<u16>, C64> = HashMap::new();
        terms.insert(vec![0; m], C64::new(1.0, 0.0));
        let mut norm = 1.0;
        for (i, &ni) in cfg.iter().enumerate() {
            for r in 0..ni {
                norm *= (r as f64 + 1.0).sqrt();
                let mut next: HashMap<Vec<u16>, C64> = HashMap::new();
                for (occ, amp) in &terms {
                    for (j, row) in gamma.iter().enumerate() {
                        let g = row[i];
                        if g == ZERO {
                            continue;
                        }
                        let mut o = occ.clone();
                        let f = (o[j] as f64 + 1.0).sqrt();
                        o[j] += 1;
                        *next.entry(o).or_insert(ZERO) += amp * g * f;
                    }
                }
                terms = next;
            }
        }
        for (occ, amp) in terms {
            let row = basis.index_of(&occ).expect("number conserving");
            out[(row, col)] += amp / norm;
        }
    }
    Ok(out)
}

enum SpeciesParity {
    Diagonal(Vec<f64>),
    Dense(DMatrix<C64>),
}

fn species_parity(basis: &SpeciesBasis, modes: &SpeciesModes) -> Result<SpeciesParity> {
    if let Some(p) = modes.parities() {
        let signs = (0..basis.dim())
            .map(|c| {
                let odd: u32 = basis
                    .config(c)
                    .iter()
                    .zip(&p)
                    .filter(|(_, s)| **s < 0)
                    .map(|(n, _)| *n as u32)
                    .sum();
                if odd.is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        return Ok(SpeciesParity::Diagonal(signs));
    }
    Ok(SpeciesParity::Dense(fock_representation(
        basis,
        &modes.parity_matrix()?,
    )?))
}

/// `⟨Ψ|P̂|Ψ⟩` for the joint reflection `x → −x` of every atom.
pub fn parity_expectation(state: &ManyBodyState, modes: &ModeBasis) -> Result<f64> {
    let basis = state.basis();
    let pd = species_parity(basis.dark(), modes.species(Species::Dark))?;
    let pb = species_parity(basis.bright(), modes.species(Species::Bright))?;
    let (dd, db) = (basis.dark().dim(), basis.bright().dim());
    let c = state.coefficient_matrix();
    // P_D C P_Bᵀ, then ⟨C, ·⟩
    let left = match &pd {
        SpeciesParity::Diagonal(s) => DMatrix::from_fn(dd, db, |i, j| c[(i, j)] * s[i]),
        SpeciesParity::Dense(p) => p * &c,
    };
    let both = match &pb {
        SpeciesParity::Diagonal(s) => DMatrix::from_fn(dd, db, |i, j| left[(i, j)] * s[j]),
        SpeciesParity::Dense(p) => &left * p.transpose(),
    };
    let v: C64 = c.iter().zip(both.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(v.re)
}
