//! Shared oracles for the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use dbsoliton::fock::{ContactIntegrals, FockBasis, ModeBasis};
use dbsoliton::meanfield::PhysicsParams;
use dbsoliton::C64;
use nalgebra::DMatrix;

/// Deterministic pseudo-random complex vector, normalized.
pub fn pseudo_random_state(n: usize, seed: u64) -> Vec<C64> {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(next(), next())).collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= norm);
    v
}

/// First-quantized two-species Hamiltonian on distinguishable particles,
/// projected onto symmetrized number states.
pub struct FirstQuantized {
    pub n_dark: usize,
    pub n_bright: usize,
    pub m_dark: usize,
    pub m_bright: usize,
    /// Columns: symmetrized number states in the Fock-basis order.
    pub sym: DMatrix<C64>,
    pub h: DMatrix<C64>,
}

fn strings(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for s in &out {
            for k in 0..m {
                let mut t = s.clone();
                t.push(k);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn occupation(s: &[usize], m: usize) -> Vec<u16> {
    let mut o = vec![0u16; m];
    for &k in s {
        o[k] += 1;
    }
    o
}

impl FirstQuantized {
    pub fn new(basis: &FockBasis, modes: &ModeBasis, params: &PhysicsParams) -> Self {
        let (nd, nb) = (basis.dark().n_particles(), basis.bright().n_particles());
        let (md, mb) = (basis.dark().n_modes(), basis.bright().n_modes());
        let sd = strings(nd, md);
        let sb = strings(nb, mb);
        let dim1 = sd.len() * sb.len();
        let hd = modes.dark().one_body_matrix(params);
        let hb = modes.bright().one_body_matrix(params);
        let udd = ContactIntegrals::new(modes.dark(), modes.dark());
        let ubb = ContactIntegrals::new(modes.bright(), modes.bright());
        let udb = ContactIntegrals::new(modes.dark(), modes.bright());
        let index: HashMap<(Vec<usize>, Vec<usize>), usize> = sd
            .iter()
            .flat_map(|a| sb.iter().map(move |b| (a.clone(), b.clone())))
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        let mut h = DMatrix::from_element(dim1, dim1, C64::new(0.0, 0.0));
        for (ca, a) in sd.iter().enumerate() {
            for (cb, b) in sb.iter().enumerate() {
                let col = ca * sb.len() + cb;
                // one-body terms, particle by particle
                for p in 0..nd {
                    for i in 0..md {
                        let mut t = a.clone();
                        let k = t[p];
                        t[p] = i;
                        let row = index[&(t, b.clone())];
                        h[(row, col)] += hd[i][k];
                    }
                }
                for p in 0..nb {
                    for j in 0..mb {
                        let mut t = b.clone();
                        let l = t[p];
                        t[p] = j;
                        let row = index[&(a.clone(), t)];
                        h[(row, col)] += hb[j][l];
                    }
                }
                // intra-species pairs p < q: ⟨ij|V|kl⟩ = g U_ijkl
                for p in 0..nd {
                    for q in p + 1..nd {
                        for i in 0..md {
                            for j in 0..md {
                                let mut t = a.clone();
                                let (k, l) = (t[p], t[q]);
                                t[p] = i;
                                t[q] = j;
                                let row = index[&(t, b.clone())];
                                h[(row, col)] += params.g_dd * udd.get(i, j, k, l);
                            }
                        }
                    }
                }
                for p in 0..nb {
                    for q in p + 1..nb {
                        for i in 0..mb {
                            for j in 0..mb {
                                let mut t = b.clone();
                                let (k, l) = (t[p], t[q]);
                                t[p] = i;
                                t[q] = j;
                                let row = index[&(a.clone(), t)];
                                h[(row, col)] += params.g_bb * ubb.get(i, j, k, l);
                            }
                        }
                    }
                }
                for p in 0..nd {
                    for q in 0..nb {
                        for i in 0..md {
                            for j in 0..mb {
                                let mut ta = a.clone();
                                let mut tb = b.clone();
                                let (k, l) = (ta[p], tb[q]);
                                ta[p] = i;
                                tb[q] = j;
                                let row = index[&(ta, tb)];
                                h[(row, col)] += params.g_db * udb.get(i, j, k, l);
                            }
                        }
                    }
                }
            }
        }
        // symmetrizer columns
        let dimf = basis.dim();
        let mut sym = DMatrix::from_element(dim1, dimf, C64::new(0.0, 0.0));
        for (ca, a) in sd.iter().enumerate() {
            let oa = occupation(a, md);
            let ia = basis.dark().index_of(&oa).unwrap();
            for (cb, b) in sb.iter().enumerate() {
                let ob = occupation(b, mb);
                let ib = basis.bright().index_of(&ob).unwrap();
                sym[(ca * sb.len() + cb, basis.index(ia, ib))] = C64::new(1.0, 0.0);
            }
        }
        for j in 0..dimf {
            let n = sym.column(j).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for i in 0..dim1 {
                sym[(i, j)] /= n;
            }
        }
        FirstQuantized {
            n_dark: nd,
            n_bright: nb,
            m_dark: md,
            m_bright: mb,
            sym,
            h,
        }
    }

    /// `H` restricted to the symmetric subspace, in Fock-basis order.
    pub fn projected(&self) -> DMatrix<C64> {
        self.sym.adjoint() * &self.h * &self.sym
    }

    /// `⟨a†_j a_i⟩` of the dark species: Σ_p |i⟩⟨j| on each particle.
    pub fn dark_density(&self, coeffs: &[C64]) -> Vec<Vec<C64>> {
        let psi = &self.sym * nalgebra::DVector::from_column_slice(coeffs);
        let sd = strings(self.n_dark, self.m_dark);
        let nb_strings = strings(self.n_bright, self.m_bright).len();
        let index: HashMap<Vec<usize>, usize> = sd.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut rho = vec![vec![C64::new(0.0, 0.0); self.m_dark]; self.m_dark];
        for (ca, a) in sd.iter().enumerate() {
            for p in 0..self.n_dark {
                // ket holds k on particle p; bra holds i
                let k = a[p];
                for i in 0..self.m_dark {
                    let mut t = a.clone();
                    t[p] = i;
                    let ra = index[&t];
                    for b in 0..nb_strings {
                        // ⟨ψ|(|i⟩⟨k|)_p|ψ⟩ contributes to ⟨a†_i a_k⟩ = ρ_ki
                        rho[k][i] += psi[ra * nb_strings + b].conj() * psi[ca * nb_strings + b];
                    }
                }
            }
        }
        rho
    }
}
