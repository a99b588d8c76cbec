use num_complex::Complex64 as C64;

use super::density::{mode_space_density, ReducedDensityMatrix};
use crate::fock::{species_one_body_matrix, ManyBodyState, ModeBasis};
use crate::Species;

/// `|Ψ⟩ = Σ_k √λ_k |Ψ_k^D⟩|Ψ_k^B⟩`, weights descending.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub lambdas: Vec<f64>,
    /// Dark species functions in the dark configuration basis.
    pub dark: Vec<Vec<C64>>,
    /// Bright species functions in the bright configuration basis.
    pub bright: Vec<Vec<C64>>,
}

impl SchmidtDecomposition {
    pub fn total(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// Entanglement entropy `−Σ λ ln λ`.
    pub fn entropy(&self) -> f64 {
        -self
            .lambdas
            .iter()
            .filter(|l| **l > 0.0)
            .map(|l| l * l.ln())
            .sum::<f64>()
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.lambdas.get(k).copied().unwrap_or(0.0)
    }

    /// One-body density matrix `ρ_k^{(1),σ}` of the `k`-th species function.
    pub fn species_function_density(
        &self,
        k: usize,
        species: Species,
        state: &ManyBodyState,
        modes: &ModeBasis,
    ) -> ReducedDensityMatrix {
        let (sb, v) = match species {
            Species::Dark => (state.basis().dark(), &self.dark[k]),
            Species::Bright => (state.basis().bright(), &self.bright[k]),
        };
        mode_space_density(species, modes, &species_one_body_matrix(sb, v))
    }
}

/// SVD of the `dim_D × dim_B` coefficient matrix.
pub fn schmidt_decompose(state: &ManyBodyState) -> SchmidtDecomposition {
    let c = state.coefficient_matrix();
    let svd = c.svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut lambdas = Vec::new();
    let mut dark = Vec::new();
    let mut bright = Vec::new();
    for k in order {
        let s = svd.singular_values[k];
        lambdas.push(s * s);
        dark.push(u.column(k).iter().copied().collect());
        // C = U Σ V†, so the bright partner is the k-th row of V†
        bright.push(vt.row(k).iter().copied().collect());
    }
    SchmidtDecomposition { lambdas, dark, bright }
}
