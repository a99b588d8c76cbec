use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{ManyBodyState, ModeBasis};
use crate::grid::{ComplexField, Grid};
use crate::meanfield::FieldPair;
use crate::Species;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// One-body density matrix in low-rank form,
/// `ρ(x, x′) = Σ_ab f_a(x) R_ab f_b*(x′)` with orthonormal `f_a`.
#[derive(Clone, Debug)]
pub struct ReducedDensityMatrix {
    species: Species,
    functions: Vec<ComplexField>,
    matrix: DMatrix<C64>,
}

impl ReducedDensityMatrix {
    pub fn new(species: Species, functions: Vec<ComplexField>, matrix: DMatrix<C64>) -> Result<Self> {
        if functions.is_empty() || matrix.nrows() != functions.len() || matrix.ncols() != functions.len() {
            return Err(Error::Shape(format!(
                "{} functions for a {}x{} matrix",
                functions.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let grid = functions[0].grid();
        if functions.iter().any(|f| f.grid() != grid) {
            return Err(Error::Shape("density-matrix functions live on different grids".into()));
        }
        Ok(ReducedDensityMatrix {
            species,
            functions,
            matrix,
        })
    }

    pub fn species(&self) -> Species {
        self.species
    }

    pub fn grid(&self) -> &Grid {
        self.functions[0].grid()
    }

    pub fn functions(&self) -> &[ComplexField] {
        &self.functions
    }

    /// Coefficient matrix `R_ab`.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn rank_bound(&self) -> usize {
        self.functions.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|v| v.re).sum()
    }

    /// Diagonal `ρ(x) = ρ(x, x)` on the grid.
    pub fn density(&self) -> Vec<f64> {
        let n = self.grid().n_points();
        let r = self.functions.len();
        (0..n)
            .map(|x| {
                let mut s = ZERO;
                for a in 0..r {
                    let fa = self.functions[a].values()[x];
                    for b in 0..r {
                        s += fa * self.matrix[(a, b)] * self.functions[b].values()[x].conj();
                    }
                }
                s.re
            })
            .collect()
    }

    /// Quadrature particle number `∫ ρ(x) dx`.
    pub fn particle_number(&self) -> f64 {
        self.grid().integrate(&self.density())
    }

    /// `ρ(x_i, x_j)`.
    pub fn element(&self, i: usize, j: usize) -> C64 {
        let r = self.functions.len();
        let mut s = ZERO;
        for a in 0..r {
            let fa = self.functions[a].values()[i];
            for b in 0..r {
                s += fa * self.matrix[(a, b)] * self.functions[b].values()[j].conj();
            }
        }
        s
    }

    /// Full `n × n` grid matrix.
    pub fn to_grid_matrix(&self) -> DMatrix<C64> {
        let n = self.grid().n_points();
        let f = DMatrix::from_fn(n, self.functions.len(), |x, a| self.functions[a].values()[x]);
        &f * &self.matrix * f.adjoint()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of `R` (equals that of `ρ` on the span).
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(hermitian_part(&self.matrix))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Rank-one density matrix of a mean-field orbital.
pub fn one_body_density_mean_field(fields: &FieldPair, species: Species) -> ReducedDensityMatrix {
    let orbital = match species {
        Species::Dark => &fields.dark,
        Species::Bright => &fields.bright,
    };
    let n = orbital.norm_sqr();
    if !(n > 0.0) {
        // empty component: keep a valid, traceless object
        let f = ComplexField::zeros(orbital.grid());
        return ReducedDensityMatrix {
            species,
            functions: vec![f],
            matrix: DMatrix::from_element(1, 1, ZERO),
        };
    }
    ReducedDensityMatrix {
        species,
        functions: vec![orbital.scaled(C64::new(1.0 / n.sqrt(), 0.0))],
        matrix: DMatrix::from_element(1, 1, C64::new(n, 0.0)),
    }
}

/// `ρ_ij = ⟨a†_j a_i⟩` mapped to the grid through the mode basis.
pub fn one_body_density(state: &ManyBodyState, modes: &ModeBasis, species: Species) -> ReducedDensityMatrix {
    let rho = state.one_body_matrix(species);
    mode_space_density(species, modes, &rho)
}

pub(crate) fn mode_space_density(species: Species, modes: &ModeBasis, rho: &[Vec<C64>]) -> ReducedDensityMatrix {
    let m = rho.len();
    ReducedDensityMatrix {
        species,
        functions: modes.species(species).modes().to_vec(),
        matrix: DMatrix::from_fn(m, m, |i, j| rho[i][j]),
    }
}

/// Natural orbitals and occupations, descending.
#[derive(Clone, Debug)]
pub struct NaturalDecomposition {
    pub species: Species,
    pub occupations: Vec<f64>,
    /// Orbitals scaled so `∫|φ_i|² = n_i`.
    pub orbitals: Vec<ComplexField>,
    /// Unit coefficient vectors in the density matrix's function basis.
    pub vectors: Vec<Vec<C64>>,
}

impl NaturalDecomposition {
    pub fn total(&self) -> f64 {
        self.occupations.iter().sum()
    }

    /// `Σ_i n_i |φ̂_i⟩⟨φ̂_i|` rebuilt from the decomposition.
    pub fn reconstruct(&self, rho: &ReducedDensityMatrix) -> ReducedDensityMatrix {
        let r = self.vectors.len();
        let v = DMatrix::from_fn(r, r, |a, k| self.vectors[k][a]);
        let d = DMatrix::from_fn(r, r, |i, j| {
            if i == j {
                C64::new(self.occupations[i], 0.0)
            } else {
                ZERO
            }
        });
        ReducedDensityMatrix {
            species: self.species,
            functions: rho.functions.clone(),
            matrix: &v * d * v.adjoint(),
        }
    }
}

/// Order by occupation (descending). Occupations equal to within
/// `1e-12·trace` are ordered by the first differing coefficient magnitude,
/// larger first.
fn order(values: &[f64], vectors: &[Vec<C64>], scale: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let tol = 1e-12 * scale.abs().max(f64::MIN_POSITIVE);
    idx.sort_by(|&a, &b| {
        if (values[a] - values[b]).abs() > tol {
            return values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal);
        }
        for (x, y) in vectors[a].iter().zip(&vectors[b]) {
            let (x, y) = (x.norm(), y.norm());
            if (x - y).abs() > 1e-12 {
                return y.partial_cmp(&x).unwrap_or(Ordering::Equal);
            }
        }
        Ordering::Equal
    });
    idx
}

pub fn natural_decomposition(rho: &ReducedDensityMatrix) -> NaturalDecomposition {
    let eig = SymmetricEigen::new(hermitian_part(&rho.matrix));
    let r = rho.functions.len();
    let vectors: Vec<Vec<C64>> = (0..r)
        .map(|k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let perm = order(&values, &vectors, rho.trace());
    let grid = rho.grid().clone();
    let mut occupations = Vec::with_capacity(r);
    let mut orbitals = Vec::with_capacity(r);
    let mut out_vectors = Vec::with_capacity(r);
    for &k in &perm {
        let mut v = vectors[k].clone();
        let mut phi = vec![ZERO; grid.n_points()];
        for (a, f) in rho.functions.iter().enumerate() {
            for (p, fv) in phi.iter_mut().zip(f.values()) {
                *p += v[a] * fv;
            }
        }
        // largest grid component real and positive
        let (mut best, mut at) = (-1.0f64, 0);
        for (i, p) in phi.iter().enumerate() {
            if p.norm() > best + 1e-14 * best.abs() {
                best = p.norm();
                at = i;
            }
        }
        let phase = if best > 0.0 {
            phi[at].conj() / best
        } else {
            C64::new(1.0, 0.0)
        };
        let n = values[k].max(0.0);
        phi.iter_mut().for_each(|p| *p *= phase * n.sqrt());
        v.iter_mut().for_each(|c| *c *= phase);
        occupations.push(values[k]);
        orbitals.push(ComplexField::new(grid.clone(), phi).expect("grid length"));
        out_vectors.push(v);
    }
    NaturalDecomposition {
        species: rho.species,
        occupations,
        orbitals,
        vectors: out_vectors,
    }
}

/// First-order coherence on a (possibly subsampled) grid.
#[derive(Clone, Debug)]
pub struct CoherenceMap {
    /// Grid indices of the sampled points.
    pub indices: Vec<usize>,
    pub positions: Vec<f64>,
    /// Row-major `g⁽¹⁾(x_a, x_b)`; `NaN` where a density is below the floor.
    pub values: Vec<C64>,
}

impl CoherenceMap {
    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn get(&self, a: usize, b: usize) -> Option<C64> {
        let v = self.values[a * self.size() + b];
        (!v.re.is_nan()).then_some(v)
    }

    /// `|g⁽¹⁾|²`, `NaN` where undefined.
    pub fn abs_sqr(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// `g⁽¹⁾(x, x′) = ρ(x, x′)/√(ρ(x)ρ(x′))` with densities floored at `1e-12·max`.
pub fn coherence_g1(rho: &ReducedDensityMatrix, stride: usize) -> CoherenceMap {
    let stride = stride.max(1);
    let density = rho.density();
    let floor = 1e-12 * density.iter().copied().fold(0.0, f64::max);
    let indices: Vec<usize> = (0..density.len()).step_by(stride).collect();
    let positions = indices.iter().map(|&i| rho.grid().x(i)).collect();
    let s = indices.len();
    // evaluate ρ(x_a, x_b) through the low-rank factors
    let r = rho.functions.len();
    let f = DMatrix::from_fn(s, r, |a, k| rho.functions[k].values()[indices[a]]);
    let full = &f * &rho.matrix * f.adjoint();
    let nan = C64::new(f64::NAN, f64::NAN);
    let mut values = vec![nan; s * s];
    for a in 0..s {
        let da = density[indices[a]];
        if !(da > floor) {
            continue;
        }
        for b in 0..s {
            let db = density[indices[b]];
            if db > floor {
                values[a * s + b] = full[(a, b)] / (da * db).sqrt();
            }
        }
    }
    CoherenceMap {
        indices,
        positions,
        values,
    }
}
