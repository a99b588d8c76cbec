use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{apply_kinetic, derivative, inner_product, ComplexField, Grid};
use crate::meanfield::{FieldPair, PhysicsParams};
use crate::Species;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeProvenance {
    /// Lowest eigenfunctions of `−½∂ₓ² + ½Ω²x²`.
    Harmonic,
    /// Mean-field orbital, its derivative, then oscillator states.
    GpNatural,
}

impl ModeProvenance {
    pub fn tag(self) -> &'static str {
        match self {
            ModeProvenance::Harmonic => "harmonic",
            ModeProvenance::GpNatural => "gp_natural",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "harmonic" | "harmonic_eigenstates" => Some(ModeProvenance::Harmonic),
            "gp_natural" | "gp_natural_modes" => Some(ModeProvenance::GpNatural),
            _ => None,
        }
    }
}

/// Oscillator eigenfunction `ψ_n` of frequency `omega`, via the stable
/// three-term recurrence.
pub fn harmonic_function(n: usize, omega: f64, x: f64) -> f64 {
    let xi = omega.sqrt() * x;
    let mut prev = 0.0;
    let mut cur = (omega / std::f64::consts::PI).powf(0.25) * (-0.5 * xi * xi).exp();
    for k in 0..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * xi * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Orthonormal single-particle modes of one species.
#[derive(Clone, Debug)]
pub struct SpeciesModes {
    modes: Vec<ComplexField>,
    /// `Some(±1)` per mode when the grid is mirror symmetric and the mode has definite parity.
    parities: Vec<Option<i8>>,
}

impl SpeciesModes {
    fn new(modes: Vec<ComplexField>) -> Self {
        let parities = modes.iter().map(mode_parity).collect();
        SpeciesModes { modes, parities }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ComplexField] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &ComplexField {
        &self.modes[i]
    }

    /// Mode parities, if every mode has one.
    pub fn parities(&self) -> Option<Vec<i8>> {
        self.parities.iter().copied().collect()
    }

    /// Project a field: `c_i = ⟨φ_i, f⟩`.
    pub fn project(&self, field: &ComplexField) -> Result<Vec<C64>> {
        self.modes.iter().map(|m| inner_product(m, field)).collect()
    }

    /// `Σ_i c_i φ_i`.
    pub fn synthesize(&self, coeffs: &[C64]) -> ComplexField {
        let grid = self.modes[0].grid();
        let mut out = vec![C64::new(0.0, 0.0); grid.n_points()];
        for (c, m) in coeffs.iter().zip(&self.modes) {
            for (o, v) in out.iter_mut().zip(m.values()) {
                *o += c * v;
            }
        }
        ComplexField::new(grid.clone(), out).expect("mode length matches grid")
    }

    /// Matrix `A_ij = ⟨φ_i| f(x) |φ_j⟩` of a multiplicative operator.
    pub fn multiplication_matrix(&self, f: impl Fn(f64) -> f64) -> Vec<Vec<C64>> {
        let grid = self.modes[0].grid();
        let w = grid.weights();
        let fx: Vec<f64> = (0..grid.n_points()).map(|i| f(grid.x(i)) * w[i]).collect();
        let m = self.len();
        let mut out = vec![vec![C64::new(0.0, 0.0); m]; m];
        for i in 0..m {
            for j in i..m {
                let s: C64 = self.modes[i]
                    .values()
                    .iter()
                    .zip(self.modes[j].values())
                    .zip(&fx)
                    .map(|((a, b), f)| a.conj() * b * f)
                    .sum();
                out[i][j] = s;
                out[j][i] = s.conj();
            }
        }
        out
    }

    /// One-body matrix `h_ij = ⟨φ_i| −½∂ₓ² + V |φ_j⟩`.
    pub fn one_body_matrix(&self, params: &PhysicsParams) -> Vec<Vec<C64>> {
        let grid = self.modes[0].grid();
        let v = params.trap_on(grid);
        let m = self.len();
        let applied: Vec<ComplexField> = self
            .modes
            .iter()
            .map(|phi| {
                let k = apply_kinetic(phi);
                let vals = k
                    .values()
                    .iter()
                    .zip(phi.values())
                    .zip(&v)
                    .map(|((kv, p), vx)| kv + p * vx)
                    .collect();
                ComplexField::new(grid.clone(), vals).expect("same grid")
            })
            .collect();
        let mut h = vec![vec![C64::new(0.0, 0.0); m]; m];
        for i in 0..m {
            for j in i..m {
                let a = inner_product(&self.modes[i], &applied[j]).expect("same grid");
                let b = inner_product(&applied[i], &self.modes[j]).expect("same grid");
                // symmetrize away quadrature round-off
                let s = 0.5 * (a + b);
                h[i][j] = s;
                h[j][i] = s.conj();
            }
        }
        for (i, row) in h.iter_mut().enumerate() {
            row[i].im = 0.0;
        }
        h
    }

    /// `Γ_ij = ∫ φ_i*(x) φ_j(−x) dx`; requires a mirror-symmetric grid.
    pub fn parity_matrix(&self) -> Result<Vec<Vec<C64>>> {
        let grid = self.modes[0].grid();
        if !mirror_symmetric(grid) {
            return Err(Error::Basis("parity needs a grid symmetric about x = 0".into()));
        }
        let m = self.len();
        let mirrored: Vec<ComplexField> = self
            .modes
            .iter()
            .map(|f| {
                let mut v = f.values().to_vec();
                v.reverse();
                ComplexField::new(grid.clone(), v).expect("same grid")
            })
            .collect();
        let mut g = vec![vec![C64::new(0.0, 0.0); m]; m];
        for i in 0..m {
            for j in 0..m {
                g[i][j] = inner_product(&self.modes[i], &mirrored[j])?;
            }
        }
        Ok(g)
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let g = inner_product(&self.modes[i], &self.modes[j]).expect("same grid");
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

fn mirror_symmetric(grid: &Grid) -> bool {
    (grid.x_min() + grid.x_max()).abs() <= 1e-12 * grid.length()
}

fn mode_parity(f: &ComplexField) -> Option<i8> {
    if !mirror_symmetric(f.grid()) {
        return None;
    }
    let v = f.values();
    let n = v.len();
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut even = 0.0_f64;
    let mut odd = 0.0_f64;
    for i in 0..n {
        even = even.max((v[i] - v[n - 1 - i]).norm());
        odd = odd.max((v[i] + v[n - 1 - i]).norm());
    }
    let tol = 1e-9 * scale;
    if even <= tol {
        Some(1)
    } else if odd <= tol {
        Some(-1)
    } else {
        None
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
fn gram_schmidt(candidates: Vec<ComplexField>, label: &str) -> Result<Vec<ComplexField>> {
    let mut out: Vec<ComplexField> = Vec::with_capacity(candidates.len());
    for (k, mut f) in candidates.into_iter().enumerate() {
        let original = f.norm_sqr().sqrt();
        if !(original > 0.0) {
            return Err(Error::Basis(format!("{label}: candidate {k} vanishes")));
        }
        for _ in 0..2 {
            for q in &out {
                let c = inner_product(q, &f)?;
                f = f.combine(C64::new(1.0, 0.0), q, -c)?;
            }
        }
        let norm = f.norm_sqr().sqrt();
        if norm < 1e-8 * original {
            return Err(Error::Basis(format!(
                "{label}: candidate {k} is linearly dependent on the previous modes (residual norm {:.3e})",
                norm / original
            )));
        }
        out.push(f.scaled(C64::new(1.0 / norm, 0.0)));
    }
    Ok(out)
}

fn harmonic_candidates(grid: &Grid, omega: f64, count: usize) -> Vec<ComplexField> {
    (0..count)
        .map(|n| ComplexField::from_fn(grid, |x| C64::new(harmonic_function(n, omega, x), 0.0)))
        .collect()
}

fn harmonic_species(grid: &Grid, omega: f64, m: usize, label: &str) -> Result<SpeciesModes> {
    Ok(SpeciesModes::new(gram_schmidt(
        harmonic_candidates(grid, omega, m),
        label,
    )?))
}

fn natural_species(orbital: &ComplexField, omega: f64, m: usize, label: &str) -> Result<SpeciesModes> {
    let grid = orbital.grid();
    let mut candidates = vec![orbital.clone()];
    if m >= 2 {
        candidates.push(derivative(orbital));
    }
    if m >= 3 {
        candidates.extend(harmonic_candidates(grid, omega, m - 2));
    }
    candidates.truncate(m);
    Ok(SpeciesModes::new(gram_schmidt(candidates, label)?))
}

/// Fixed single-particle bases for both species.
#[derive(Clone, Debug)]
pub struct ModeBasis {
    provenance: ModeProvenance,
    omega: f64,
    dark: SpeciesModes,
    bright: SpeciesModes,
}

impl ModeBasis {
    pub fn harmonic(grid: &Grid, omega: f64, m_dark: usize, m_bright: usize) -> Result<Self> {
        check_counts(m_dark, m_bright)?;
        if !(omega > 0.0) {
            return Err(Error::Basis("harmonic modes need a positive trap frequency".into()));
        }
        Ok(ModeBasis {
            provenance: ModeProvenance::Harmonic,
            omega,
            dark: harmonic_species(grid, omega, m_dark, "dark modes")?,
            bright: harmonic_species(grid, omega, m_bright, "bright modes")?,
        })
    }

    pub fn gp_natural(fields: &FieldPair, omega: f64, m_dark: usize, m_bright: usize) -> Result<Self> {
        check_counts(m_dark, m_bright)?;
        if (m_dark > 2 || m_bright > 2) && !(omega > 0.0) {
            return Err(Error::Basis(
                "padding with oscillator states needs a positive trap frequency".into(),
            ));
        }
        Ok(ModeBasis {
            provenance: ModeProvenance::GpNatural,
            omega,
            dark: natural_species(&fields.dark, omega, m_dark, "dark modes")?,
            bright: natural_species(&fields.bright, omega, m_bright, "bright modes")?,
        })
    }

    pub fn build(
        provenance: ModeProvenance,
        grid: &Grid,
        fields: Option<&FieldPair>,
        omega: f64,
        m_dark: usize,
        m_bright: usize,
    ) -> Result<Self> {
        match provenance {
            ModeProvenance::Harmonic => Self::harmonic(grid, omega, m_dark, m_bright),
            ModeProvenance::GpNatural => {
                let fields =
                    fields.ok_or_else(|| Error::Basis("gp_natural modes need a converged mean-field pair".into()))?;
                Self::gp_natural(fields, omega, m_dark, m_bright)
            }
        }
    }

    /// Reassemble a basis from stored modes, e.g. read back from a snapshot.
    /// The modes are used as given and must already be orthonormal.
    pub fn from_modes(
        provenance: ModeProvenance,
        omega: f64,
        dark: Vec<ComplexField>,
        bright: Vec<ComplexField>,
    ) -> Result<Self> {
        check_counts(dark.len(), bright.len())?;
        let grid = dark[0].grid().clone();
        if dark.iter().chain(&bright).any(|f| *f.grid() != grid) {
            return Err(Error::Basis("stored modes live on different grids".into()));
        }
        let basis = ModeBasis {
            provenance,
            omega,
            dark: SpeciesModes::new(dark),
            bright: SpeciesModes::new(bright),
        };
        let defect = basis
            .dark
            .orthonormality_defect()
            .max(basis.bright.orthonormality_defect());
        if defect > 1e-10 {
            return Err(Error::Basis(format!(
                "stored modes are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(basis)
    }

    pub fn provenance(&self) -> ModeProvenance {
        self.provenance
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn grid(&self) -> &Grid {
        self.dark.modes[0].grid()
    }

    pub fn species(&self, s: Species) -> &SpeciesModes {
        match s {
            Species::Dark => &self.dark,
            Species::Bright => &self.bright,
        }
    }

    pub fn dark(&self) -> &SpeciesModes {
        &self.dark
    }

    pub fn bright(&self) -> &SpeciesModes {
        &self.bright
    }
}

fn check_counts(m_dark: usize, m_bright: usize) -> Result<()> {
    if m_dark == 0 || m_bright == 0 {
        return Err(Error::Basis("each species needs at least one mode".into()));
    }
    Ok(())
}
