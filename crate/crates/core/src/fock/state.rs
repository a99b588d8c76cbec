use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::basis::{FockBasis, SpeciesBasis};
use super::modes::{ModeBasis, SpeciesModes};
use crate::error::{Error, Result};
use crate::meanfield::FieldPair;
use crate::Species;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest tolerated loss of orbital norm when projecting onto the modes.
pub const MAX_PROJECTION_DEFICIT: f64 = 0.01;

#[derive(Clone, Debug)]
pub struct ManyBodyState {
    basis: Arc<FockBasis>,
    coeffs: Vec<C64>,
    pub time: f64,
}

impl ManyBodyState {
    pub fn new(basis: Arc<FockBasis>, coeffs: Vec<C64>, time: f64) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::Shape(format!(
                "{} coefficients for a basis of dimension {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        Ok(ManyBodyState { basis, coeffs, time })
    }

    /// Single number state.
    pub fn fock(basis: Arc<FockBasis>, dark: &[u16], bright: &[u16]) -> Result<Self> {
        let d = basis
            .dark()
            .index_of(dark)
            .ok_or_else(|| Error::Basis(format!("configuration {dark:?} not in the dark basis")))?;
        let b = basis
            .bright()
            .index_of(bright)
            .ok_or_else(|| Error::Basis(format!("configuration {bright:?} not in the bright basis")))?;
        let mut coeffs = vec![ZERO; basis.dim()];
        coeffs[basis.index(d, b)] = C64::new(1.0, 0.0);
        Ok(ManyBodyState {
            basis,
            coeffs,
            time: 0.0,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.coeffs.iter_mut().for_each(|c| *c /= n);
        }
    }

    pub fn overlap(&self, other: &ManyBodyState) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::Shape("states live in different Fock bases".into()));
        }
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum())
    }

    /// Coefficients as a `dim_D × dim_B` matrix.
    pub fn coefficient_matrix(&self) -> DMatrix<C64> {
        let (dd, db) = (self.basis.dark().dim(), self.basis.bright().dim());
        DMatrix::from_row_slice(dd, db, &self.coeffs)
    }

    /// `ρ_ij = ⟨a†_j a_i⟩` in the mode basis.
    pub fn one_body_matrix(&self, species: Species) -> Vec<Vec<C64>> {
        let sb = self.basis.species(species);
        let m = sb.n_modes();
        let mut rho = vec![vec![ZERO; m]; m];
        for i in 0..m {
            for j in 0..m {
                rho[i][j] = self.hop_expectation(species, j, i);
            }
        }
        rho
    }

    /// `⟨a†_i a_k⟩` for one species.
    pub fn hop_expectation(&self, species: Species, i: usize, k: usize) -> C64 {
        let (dd, db) = (self.basis.dark().dim(), self.basis.bright().dim());
        let c = &self.coeffs;
        let mut s = ZERO;
        match species {
            Species::Dark => {
                let hops = self.basis.dark().hops();
                for d in 0..dd {
                    if let Some((t, a)) = hops.get(i, k, d) {
                        let (src, dst) = (&c[d * db..(d + 1) * db], &c[t * db..(t + 1) * db]);
                        let dot: C64 = dst.iter().zip(src).map(|(x, y)| x.conj() * y).sum();
                        s += dot * a;
                    }
                }
            }
            Species::Bright => {
                let hops = self.basis.bright().hops();
                for b in 0..db {
                    if let Some((t, a)) = hops.get(i, k, b) {
                        let dot: C64 = (0..dd).map(|d| c[d * db + t].conj() * c[d * db + b]).sum();
                        s += dot * a;
                    }
                }
            }
        }
        s
    }

    /// `(Σ_ik A_ik a†_i a_k) |ψ⟩` for one species.
    pub fn apply_one_body(&self, species: Species, a: &[Vec<C64>]) -> Vec<C64> {
        let (dd, db) = (self.basis.dark().dim(), self.basis.bright().dim());
        let m = self.basis.species(species).n_modes();
        let c = &self.coeffs;
        let mut out = vec![ZERO; c.len()];
        match species {
            Species::Dark => {
                let hops = self.basis.dark().hops();
                for d in 0..dd {
                    for i in 0..m {
                        for k in 0..m {
                            if a[i][k] == ZERO {
                                continue;
                            }
                            if let Some((t, amp)) = hops.get(i, k, d) {
                                let f = a[i][k] * amp;
                                for b in 0..db {
                                    out[t * db + b] += f * c[d * db + b];
                                }
                            }
                        }
                    }
                }
            }
            Species::Bright => {
                let hops = self.basis.bright().hops();
                for b in 0..db {
                    for i in 0..m {
                        for k in 0..m {
                            if a[i][k] == ZERO {
                                continue;
                            }
                            if let Some((t, amp)) = hops.get(i, k, b) {
                                let f = a[i][k] * amp;
                                for d in 0..dd {
                                    out[d * db + t] += f * c[d * db + b];
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn with_coeffs(&self, coeffs: Vec<C64>) -> ManyBodyState {
        ManyBodyState {
            basis: self.basis.clone(),
            coeffs,
            time: self.time,
        }
    }
}

/// `ρ_ij = ⟨v| a†_j a_i |v⟩` for a vector in one species' configuration space.
pub fn species_one_body_matrix(basis: &SpeciesBasis, v: &[C64]) -> Vec<Vec<C64>> {
    let m = basis.n_modes();
    let hops = basis.hops();
    let mut rho = vec![vec![ZERO; m]; m];
    for c in 0..basis.dim() {
        if v[c] == ZERO {
            continue;
        }
        for i in 0..m {
            for j in 0..m {
                if let Some((t, a)) = hops.get(j, i, c) {
                    rho[i][j] += v[t].conj() * v[c] * a;
                }
            }
        }
    }
    rho
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Coefficients of the normalized permanent `(Σ c_i a†_i)^N |0⟩ / √N!`
/// for unit-norm `c`, in log space.
fn condensate_coeffs(basis: &SpeciesBasis, c: &[C64]) -> Vec<C64> {
    let n = basis.n_particles();
    let lnf: Vec<f64> = (0..=n).map(ln_factorial).collect();
    (0..basis.dim())
        .map(|idx| {
            let cfg = basis.config(idx);
            let mut log_mag = 0.5 * lnf[n];
            let mut phase = 0.0;
            for (ni, ci) in cfg.iter().zip(c) {
                let ni = *ni as usize;
                if ni == 0 {
                    continue;
                }
                if *ci == ZERO {
                    return ZERO;
                }
                log_mag += ni as f64 * ci.norm().ln() - 0.5 * lnf[ni];
                phase += ni as f64 * ci.arg();
            }
            C64::from_polar(log_mag.exp(), phase)
        })
        .collect()
}

fn orbital_coefficients(modes: &SpeciesModes, field: &crate::grid::ComplexField, label: &str) -> Result<Vec<C64>> {
    let norm = field.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::Basis(format!("{label} orbital is empty")));
    }
    let mut c = modes.project(field)?;
    c.iter_mut().for_each(|v| *v /= norm.sqrt());
    let retained: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    let deficit = 1.0 - retained;
    if deficit > MAX_PROJECTION_DEFICIT {
        return Err(Error::Basis(format!(
            "{label} orbital loses {:.3}% of its norm in the mode basis (limit {:.1}%)",
            100.0 * deficit,
            100.0 * MAX_PROJECTION_DEFICIT
        )));
    }
    c.iter_mut().for_each(|v| *v /= retained.sqrt());
    Ok(c)
}

/// Embed the mean-field product state: every dark atom in `φᴰ/√N_D`, every
/// bright atom in `φᴮ/√N_B`, projected onto the modes.
pub fn embed_mean_field(fields: &FieldPair, modes: &ModeBasis, basis: Arc<FockBasis>) -> Result<ManyBodyState> {
    if basis.dark().n_modes() != modes.dark().len() || basis.bright().n_modes() != modes.bright().len() {
        return Err(Error::Basis(
            "mode counts of the Fock basis and the mode basis differ".into(),
        ));
    }
    let cd = orbital_coefficients(modes.dark(), &fields.dark, "dark")?;
    let cb = orbital_coefficients(modes.bright(), &fields.bright, "bright")?;
    Ok(product_state(basis, &cd, &cb, fields.time))
}

/// Product of two single-orbital condensates with unit-norm mode coefficients.
pub fn product_state(basis: Arc<FockBasis>, dark: &[C64], bright: &[C64], time: f64) -> ManyBodyState {
    let vd = condensate_coeffs(basis.dark(), dark);
    let vb = condensate_coeffs(basis.bright(), bright);
    let mut coeffs = Vec::with_capacity(vd.len() * vb.len());
    for a in &vd {
        for b in &vb {
            coeffs.push(a * b);
        }
    }
    let mut s = ManyBodyState { basis, coeffs, time };
    s.normalize();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_embedding() {
        let basis = Arc::new(FockBasis::new(2, 2, 1, 1).unwrap());
        let h = 0.5f64.sqrt();
        let s = product_state(basis, &[C64::new(h, 0.0), C64::new(h, 0.0)], &[C64::new(1.0, 0.0)], 0.0);
        let c: Vec<f64> = s.coeffs().iter().map(|v| v.re).collect();
        let expect = [0.5, h, 0.5];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn number_state_density_matrix() {
        let basis = Arc::new(FockBasis::new(2, 2, 1, 2).unwrap());
        let s = ManyBodyState::fock(basis, &[1, 1], &[0, 1]).unwrap();
        let rho = s.one_body_matrix(Species::Dark);
        assert_eq!(rho[0][0], C64::new(1.0, 0.0));
        assert_eq!(rho[1][1], C64::new(1.0, 0.0));
        assert_eq!(rho[0][1], ZERO);
        let rb = s.one_body_matrix(Species::Bright);
        assert_eq!(rb[1][1], C64::new(1.0, 0.0));
    }

    #[test]
    fn large_condensate_stays_normalized() {
        let basis = Arc::new(FockBasis::new(60, 3, 1, 1).unwrap());
        let c = [C64::new(0.6, 0.0), C64::new(0.0, 0.64), C64::new(0.48, 0.0)];
        let s = product_state(basis, &c, &[C64::new(1.0, 0.0)], 0.0);
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let rho = s.one_body_matrix(Species::Dark);
        // ρ_ij = N c_i c_j*
        assert!((rho[0][1] - 60.0 * c[0] * c[1].conj()).norm() < 1e-10);
    }
}
