use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64 as C64;

use super::basis::{FockBasis, SpeciesBasis};
use super::modes::{ModeBasis, SpeciesModes};
use crate::error::{Error, Result};
use crate::meanfield::PhysicsParams;

/// Above this dimension only the factorized (matrix-free) form is kept.
pub const CSR_LIMIT: usize = 100_000;

/// Assembly is also skipped when the matrix would hold more entries than this.
pub const CSR_TRIPLET_LIMIT: usize = 20_000_000;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Contact integrals `U_ijkl = ∫ φ^a_i* φ^b_j* φ^a_k φ^b_l dx`.
#[derive(Clone, Debug)]
pub struct ContactIntegrals {
    ma: usize,
    mb: usize,
    data: Vec<C64>,
}

impl ContactIntegrals {
    pub fn new(a: &SpeciesModes, b: &SpeciesModes) -> Self {
        let (ma, mb) = (a.len(), b.len());
        let grid = a.mode(0).grid();
        let w = grid.weights();
        let pairs = |s: &SpeciesModes, weighted: bool| -> Vec<Vec<C64>> {
            let m = s.len();
            let mut out = Vec::with_capacity(m * m);
            for i in 0..m {
                for k in 0..m {
                    out.push(
                        s.mode(i)
                            .values()
                            .iter()
                            .zip(s.mode(k).values())
                            .zip(&w)
                            .map(|((p, q), wx)| p.conj() * q * if weighted { *wx } else { 1.0 })
                            .collect(),
                    );
                }
            }
            out
        };
        let pa = pairs(a, true);
        let pb = pairs(b, false);
        let same = std::ptr::eq(a, b);
        let mut data = vec![ZERO; ma * ma * mb * mb];
        let idx = |i: usize, j: usize, k: usize, l: usize| ((i * mb + j) * ma + k) * mb + l;
        for i in 0..ma {
            for k in 0..ma {
                for j in 0..mb {
                    for l in 0..mb {
                        // U_ijkl = U_jilk when both species share the modes
                        if same && (j, l) < (i, k) {
                            data[idx(i, j, k, l)] = data[idx(j, i, l, k)];
                            continue;
                        }
                        let left = &pa[i * ma + k];
                        let right = &pb[j * mb + l];
                        data[idx(i, j, k, l)] = left.iter().zip(right).map(|(x, y)| x * y).sum();
                    }
                }
            }
        }
        ContactIntegrals { ma, mb, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.data[((i * self.mb + j) * self.ma + k) * self.mb + l]
    }
}

fn csr_from_columns(dim: usize, columns: Vec<HashMap<usize, C64>>) -> CsrMatrix<C64> {
    let mut coo = CooMatrix::new(dim, dim);
    for (c, col) in columns.into_iter().enumerate() {
        let mut entries: Vec<_> = col.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        for (r, v) in entries {
            if v != ZERO {
                coo.push(r, c, v);
            }
        }
    }
    CsrMatrix::from(&coo)
}

/// `a†_i a_k` on one species as a sparse matrix.
pub fn hop_matrix(basis: &SpeciesBasis, i: usize, k: usize) -> CsrMatrix<C64> {
    let dim = basis.dim();
    let hops = basis.hops();
    let mut coo = CooMatrix::new(dim, dim);
    for c in 0..dim {
        if let Some((t, a)) = hops.get(i, k, c) {
            coo.push(t, c, C64::new(a, 0.0));
        }
    }
    CsrMatrix::from(&coo)
}

/// `Σ h_ij a†_i a_j + ½ g Σ U_ijkl a†_i a†_j a_k a_l` on one species,
/// using `a†_i a†_j a_k a_l = E_ik E_jl − δ_jk E_il`.
fn species_hamiltonian(basis: &SpeciesBasis, h: &[Vec<C64>], u: &ContactIntegrals, g: f64) -> CsrMatrix<C64> {
    let (dim, m) = (basis.dim(), basis.n_modes());
    let hops = basis.hops();
    let mut columns = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut col: HashMap<usize, C64> = HashMap::new();
        for i in 0..m {
            for k in 0..m {
                if let Some((t, a)) = hops.get(i, k, c) {
                    *col.entry(t).or_insert(ZERO) += h[i][k] * a;
                }
            }
        }
        if g != 0.0 {
            for j in 0..m {
                for l in 0..m {
                    let Some((c1, a1)) = hops.get(j, l, c) else { continue };
                    for i in 0..m {
                        for k in 0..m {
                            if let Some((c2, a2)) = hops.get(i, k, c1) {
                                *col.entry(c2).or_insert(ZERO) += 0.5 * g * u.get(i, j, k, l) * (a1 * a2);
                            }
                        }
                    }
                }
            }
            // −δ_jk E_il term
            for i in 0..m {
                for l in 0..m {
                    if let Some((t, a)) = hops.get(i, l, c) {
                        let s: C64 = (0..m).map(|j| u.get(i, j, j, l)).sum();
                        *col.entry(t).or_insert(ZERO) -= 0.5 * g * s * a;
                    }
                }
            }
        }
        columns.push(col);
    }
    csr_from_columns(dim, columns)
}

/// Inter-species part `Σ_ik E^D_ik ⊗ W_ik` with `W_ik = g_DB Σ_jl U_ijkl E^B_jl`.
#[derive(Clone, Debug)]
struct Coupling {
    dark_hop: CsrMatrix<C64>,
    bright_op: CsrMatrix<C64>,
}

#[derive(Clone, Debug)]
pub struct HamiltonianMatrix {
    basis: Arc<FockBasis>,
    h_dark: CsrMatrix<C64>,
    h_bright: CsrMatrix<C64>,
    couplings: Vec<Coupling>,
    csr: Option<CsrMatrix<C64>>,
    one_body_dark: Vec<Vec<C64>>,
    one_body_bright: Vec<Vec<C64>>,
}

/// Second-quantized two-species Hamiltonian in a fixed mode basis.
pub fn assemble_hamiltonian(
    basis: Arc<FockBasis>,
    modes: &ModeBasis,
    params: &PhysicsParams,
) -> Result<HamiltonianMatrix> {
    params.validate()?;
    let (md, mb) = (modes.dark().len(), modes.bright().len());
    if basis.dark().n_modes() != md || basis.bright().n_modes() != mb {
        return Err(Error::Basis(format!(
            "Fock basis uses ({}, {}) modes but the mode basis has ({md}, {mb})",
            basis.dark().n_modes(),
            basis.bright().n_modes()
        )));
    }
    let hd = modes.dark().one_body_matrix(params);
    let hb = modes.bright().one_body_matrix(params);
    let udd = ContactIntegrals::new(modes.dark(), modes.dark());
    let ubb = ContactIntegrals::new(modes.bright(), modes.bright());
    let h_dark = species_hamiltonian(basis.dark(), &hd, &udd, params.g_dd);
    let h_bright = species_hamiltonian(basis.bright(), &hb, &ubb, params.g_bb);

    let mut couplings = Vec::new();
    if params.g_db != 0.0 && basis.dark().n_particles() > 0 && basis.bright().n_particles() > 0 {
        let udb = ContactIntegrals::new(modes.dark(), modes.bright());
        let bdim = basis.bright().dim();
        let hops_b = basis.bright().hops();
        for i in 0..md {
            for k in 0..md {
                let mut columns = Vec::with_capacity(bdim);
                for c in 0..bdim {
                    let mut col: HashMap<usize, C64> = HashMap::new();
                    for j in 0..mb {
                        for l in 0..mb {
                            if let Some((t, a)) = hops_b.get(j, l, c) {
                                *col.entry(t).or_insert(ZERO) += params.g_db * udb.get(i, j, k, l) * a;
                            }
                        }
                    }
                    columns.push(col);
                }
                let bright_op = csr_from_columns(bdim, columns);
                let dark_hop = hop_matrix(basis.dark(), i, k);
                if bright_op.nnz() > 0 && dark_hop.nnz() > 0 {
                    couplings.push(Coupling { dark_hop, bright_op });
                }
            }
        }
    }

    let mut h = HamiltonianMatrix {
        basis,
        h_dark,
        h_bright,
        couplings,
        csr: None,
        one_body_dark: hd,
        one_body_bright: hb,
    };
    if h.dim() <= CSR_LIMIT && h.triplet_estimate() <= CSR_TRIPLET_LIMIT {
        h.csr = Some(h.assemble_csr());
    }
    Ok(h)
}

impl HamiltonianMatrix {
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn csr(&self) -> Option<&CsrMatrix<C64>> {
        self.csr.as_ref()
    }

    pub fn one_body(&self, species: crate::Species) -> &[Vec<C64>] {
        match species {
            crate::Species::Dark => &self.one_body_dark,
            crate::Species::Bright => &self.one_body_bright,
        }
    }

    /// Upper bound on the stored entries of the assembled matrix.
    fn triplet_estimate(&self) -> usize {
        let (ddim, bdim) = (self.basis.dark().dim(), self.basis.bright().dim());
        self.h_dark.nnz() * bdim
            + ddim * self.h_bright.nnz()
            + self
                .couplings
                .iter()
                .map(|c| c.dark_hop.nnz() * c.bright_op.nnz())
                .sum::<usize>()
    }

    fn assemble_csr(&self) -> CsrMatrix<C64> {
        let bdim = self.basis.bright().dim();
        let ddim = self.basis.dark().dim();
        let dim = self.dim();
        let mut coo = CooMatrix::new(dim, dim);
        for (r, c, v) in self.h_dark.triplet_iter() {
            for b in 0..bdim {
                coo.push(r * bdim + b, c * bdim + b, *v);
            }
        }
        for d in 0..ddim {
            for (p, q, v) in self.h_bright.triplet_iter() {
                coo.push(d * bdim + p, d * bdim + q, *v);
            }
        }
        for cp in &self.couplings {
            for (r, c, e) in cp.dark_hop.triplet_iter() {
                for (p, q, w) in cp.bright_op.triplet_iter() {
                    coo.push(r * bdim + p, c * bdim + q, e * w);
                }
            }
        }
        CsrMatrix::from(&coo)
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        match &self.csr {
            Some(csr) => csr_apply(csr, x, y),
            None => self.apply_matrix_free(x, y),
        }
    }

    /// `y = H x` from the Kronecker factors, never forming `H`.
    pub fn apply_matrix_free(&self, x: &[C64], y: &mut [C64]) {
        let bdim = self.basis.bright().dim();
        y.iter_mut().for_each(|v| *v = ZERO);
        for (r, c, v) in self.h_dark.triplet_iter() {
            let (yr, xc) = (r * bdim, c * bdim);
            for b in 0..bdim {
                y[yr + b] += v * x[xc + b];
            }
        }
        let ddim = self.basis.dark().dim();
        for d in 0..ddim {
            let off = d * bdim;
            for (p, q, v) in self.h_bright.triplet_iter() {
                y[off + p] += v * x[off + q];
            }
        }
        for cp in &self.couplings {
            for (r, c, e) in cp.dark_hop.triplet_iter() {
                let (yr, xc) = (r * bdim, c * bdim);
                for (p, q, w) in cp.bright_op.triplet_iter() {
                    y[yr + p] += e * w * x[xc + q];
                }
            }
        }
    }

    /// `⟨x|H|x⟩` (real part).
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let mut y = vec![ZERO; x.len()];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Largest `|H_ij − H_ji*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let dense = self.to_dense();
        let n = dense.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((dense[(i, j)] - dense[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Dense copy, for checks on small spaces.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut out = DMatrix::from_element(n, n, ZERO);
        let mut e = vec![ZERO; n];
        let mut col = vec![ZERO; n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            self.apply(&e, &mut col);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
            e[j] = ZERO;
        }
        out
    }
}

pub(crate) fn csr_apply(csr: &CsrMatrix<C64>, x: &[C64], y: &mut [C64]) {
    let offsets = csr.row_offsets();
    let cols = csr.col_indices();
    let vals = csr.values();
    for (r, out) in y.iter_mut().enumerate() {
        let mut s = ZERO;
        for p in offsets[r]..offsets[r + 1] {
            s += vals[p] * x[cols[p]];
        }
        *out = s;
    }
}
