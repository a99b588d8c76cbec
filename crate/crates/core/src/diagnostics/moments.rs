use num_complex::Complex64 as C64;

use crate::fock::{ManyBodyState, ModeBasis, SpeciesModes};
use crate::grid::{apply_kinetic, derivative, inner_product, ComplexField};
use crate::meanfield::FieldPair;
use crate::Species;

type Matrix = Vec<Vec<C64>>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// One-body matrices of `x`, `x²`, `p = −i∂`, `p²` and `xp` in a mode set.
#[derive(Clone, Debug)]
pub struct SpeciesOperators {
    pub x: Matrix,
    pub x2: Matrix,
    pub p: Matrix,
    pub p2: Matrix,
    pub xp: Matrix,
}

fn gram(left: &[ComplexField], right: &[ComplexField]) -> Matrix {
    left.iter()
        .map(|a| right.iter().map(|b| inner_product(a, b).expect("same grid")).collect())
        .collect()
}

fn hermitize(m: &mut Matrix) {
    let n = m.len();
    for i in 0..n {
        for j in i..n {
            let s = 0.5 * (m[i][j] + m[j][i].conj());
            m[i][j] = s;
            m[j][i] = s.conj();
        }
    }
}

fn product(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn adjoint(a: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

fn times_x(f: &ComplexField) -> ComplexField {
    f.map(|x, v| v * x)
}

fn momentum(f: &ComplexField) -> ComplexField {
    derivative(f).scaled(-I)
}

impl SpeciesOperators {
    pub fn new(modes: &SpeciesModes) -> Self {
        let phi = modes.modes();
        let xphi: Vec<ComplexField> = phi.iter().map(times_x).collect();
        let pphi: Vec<ComplexField> = phi.iter().map(momentum).collect();
        let tphi: Vec<ComplexField> = phi.iter().map(apply_kinetic).collect();
        let x = modes.multiplication_matrix(|x| x);
        let x2 = modes.multiplication_matrix(|x| x * x);
        let mut p = gram(phi, &pphi);
        hermitize(&mut p);
        let mut p2 = gram(phi, &tphi);
        p2.iter_mut().flatten().for_each(|v| *v *= 2.0);
        hermitize(&mut p2);
        // ⟨φ_i| x p |φ_j⟩ = ⟨x φ_i | p φ_j⟩
        let xp = gram(&xphi, &pphi);
        SpeciesOperators { x, x2, p, p2, xp }
    }
}

/// Whether two-body moments come from the correlated state or from the
/// product-state factorization `⟨x x′⟩ = ⟨x⟩⟨x′⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentSource {
    Exact,
    MeanFieldFactorized,
}

impl MomentSource {
    pub fn tag(self) -> &'static str {
        match self {
            MomentSource::Exact => "exact",
            MomentSource::MeanFieldFactorized => "mean_field_factorized",
        }
    }
}

/// Per-particle spatial moments of both species.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositionMoments {
    pub n_dark: f64,
    pub n_bright: f64,
    pub mean_dark: f64,
    pub mean_bright: f64,
    pub sq_dark: f64,
    pub sq_bright: f64,
    /// `⟨x_D x′_D⟩` over distinct pairs (0 for a single particle).
    pub pair_dd: f64,
    pub pair_db: f64,
    pub pair_bb: f64,
    pub source: MomentSource,
}

/// Centre-of-mass moments with `R = X/N` and `P = P_tot/N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmMoments {
    pub n: f64,
    pub r: f64,
    pub r2: f64,
    pub p: f64,
    pub p2: f64,
    /// `⟨RP + PR⟩`.
    pub rp_sym: f64,
    pub source: MomentSource,
}

impl CmMoments {
    pub fn variance(&self) -> f64 {
        self.r2 - self.r * self.r
    }

    pub fn momentum_variance(&self) -> f64 {
        self.p2 - self.p * self.p
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `Σ_il M_il ⟨a†_i a_l⟩`.
fn one_body_trace(m: &Matrix, rho: &Matrix) -> C64 {
    let n = m.len();
    let mut s = ZERO;
    for i in 0..n {
        for l in 0..n {
            // rho[l][i] = ⟨a†_i a_l⟩
            s += m[i][l] * rho[l][i];
        }
    }
    s
}

fn correction(a: &Matrix, b: &Matrix, exact: &Matrix, rho: &Matrix) -> C64 {
    let trunc = product(a, b);
    let diff: Matrix = trunc
        .iter()
        .zip(exact)
        .map(|(r, e)| r.iter().zip(e).map(|(x, y)| x - y).collect())
        .collect();
    one_body_trace(&diff, rho)
}

struct Prepared {
    ops: [SpeciesOperators; 2],
    rho: [Matrix; 2],
    n: [f64; 2],
}

fn prepare(state: &ManyBodyState, modes: &ModeBasis) -> Prepared {
    let basis = state.basis();
    Prepared {
        ops: [
            SpeciesOperators::new(modes.dark()),
            SpeciesOperators::new(modes.bright()),
        ],
        rho: [
            state.one_body_matrix(Species::Dark),
            state.one_body_matrix(Species::Bright),
        ],
        n: [basis.dark().n_particles() as f64, basis.bright().n_particles() as f64],
    }
}

const SPECIES: [Species; 2] = [Species::Dark, Species::Bright];

pub fn position_moments(state: &ManyBodyState, modes: &ModeBasis) -> PositionMoments {
    let pr = prepare(state, modes);
    let xs: Vec<Vec<C64>> = (0..2).map(|s| state.apply_one_body(SPECIES[s], &pr.ops[s].x)).collect();
    let c = state.coeffs();
    let mean: Vec<f64> = (0..2).map(|s| dot(c, &xs[s]).re / pr.n[s]).collect();
    let sq: Vec<f64> = (0..2)
        .map(|s| one_body_trace(&pr.ops[s].x2, &pr.rho[s]).re / pr.n[s])
        .collect();
    let pair = |s: usize| {
        let n = pr.n[s];
        if n < 2.0 {
            return 0.0;
        }
        // Σ_{p≠q} x_p x_q = X² − Σ_p x_p², with X² from the truncated product
        let xx = dot(&xs[s], &xs[s]) - one_body_trace(&product(&pr.ops[s].x, &pr.ops[s].x), &pr.rho[s]);
        xx.re / (n * (n - 1.0))
    };
    PositionMoments {
        n_dark: pr.n[0],
        n_bright: pr.n[1],
        mean_dark: mean[0],
        mean_bright: mean[1],
        sq_dark: sq[0],
        sq_bright: sq[1],
        pair_dd: pair(0),
        pair_db: dot(&xs[0], &xs[1]).re / (pr.n[0] * pr.n[1]),
        pair_bb: pair(1),
        source: MomentSource::Exact,
    }
}

struct FieldMoments {
    n: f64,
    x: f64,
    x2: f64,
    p: f64,
    p2: f64,
    rp_sym: f64,
}

fn field_moments(f: &ComplexField) -> FieldMoments {
    let n = f.norm_sqr();
    if !(n > 0.0) {
        return FieldMoments {
            n: 0.0,
            x: 0.0,
            x2: 0.0,
            p: 0.0,
            p2: 0.0,
            rp_sym: 0.0,
        };
    }
    let grid = f.grid();
    let dens = f.density();
    let nodes = grid.nodes();
    let x = grid.integrate(&dens.iter().zip(&nodes).map(|(d, x)| d * x).collect::<Vec<_>>());
    let x2 = grid.integrate(&dens.iter().zip(&nodes).map(|(d, x)| d * x * x).collect::<Vec<_>>());
    let pf = momentum(f);
    let p = inner_product(f, &pf).expect("same grid").re;
    let p2 = 2.0 * inner_product(f, &apply_kinetic(f)).expect("same grid").re;
    let rp_sym = 2.0 * inner_product(&times_x(f), &pf).expect("same grid").re;
    FieldMoments {
        n,
        x: x / n,
        x2: x2 / n,
        p: p / n,
        p2: p2 / n,
        rp_sym: rp_sym / n,
    }
}

pub fn position_moments_mean_field(fields: &FieldPair) -> PositionMoments {
    let d = field_moments(&fields.dark);
    let b = field_moments(&fields.bright);
    PositionMoments {
        n_dark: d.n,
        n_bright: b.n,
        mean_dark: d.x,
        mean_bright: b.x,
        sq_dark: d.x2,
        sq_bright: b.x2,
        pair_dd: d.x * d.x,
        pair_db: d.x * b.x,
        pair_bb: b.x * b.x,
        source: MomentSource::MeanFieldFactorized,
    }
}

/// `σ_R²` assembled from species moments:
/// `[N_D⟨x_D²⟩ + N_B⟨x_B²⟩ + N_D(N_D−1)⟨x_Dx′_D⟩ + 2N_DN_B⟨x_Dx′_B⟩ + N_B(N_B−1)⟨x_Bx′_B⟩]/N² − ⟨R⟩²`.
pub fn cm_variance(m: &PositionMoments) -> f64 {
    let (nd, nb) = (m.n_dark, m.n_bright);
    let n = nd + nb;
    let second = nd * m.sq_dark
        + nb * m.sq_bright
        + nd * (nd - 1.0) * m.pair_dd
        + 2.0 * nd * nb * m.pair_db
        + nb * (nb - 1.0) * m.pair_bb;
    let mean = (nd * m.mean_dark + nb * m.mean_bright) / n;
    second / (n * n) - mean * mean
}

/// Exact centre-of-mass moments of a many-body state.
pub fn cm_moments(state: &ManyBodyState, modes: &ModeBasis) -> CmMoments {
    let pr = prepare(state, modes);
    let c = state.coeffs();
    let total = |f: &dyn Fn(&SpeciesOperators) -> &Matrix| -> Vec<C64> {
        let a = state.apply_one_body(Species::Dark, f(&pr.ops[0]));
        let b = state.apply_one_body(Species::Bright, f(&pr.ops[1]));
        a.iter().zip(&b).map(|(x, y)| x + y).collect()
    };
    let xpsi = total(&|o| &o.x);
    let ppsi = total(&|o| &o.p);
    let mut x2 = dot(&xpsi, &xpsi);
    let mut p2 = dot(&ppsi, &ppsi);
    let mut xp = 2.0 * dot(&xpsi, &ppsi).re;
    for s in 0..2 {
        let o = &pr.ops[s];
        let rho = &pr.rho[s];
        x2 -= correction(&o.x, &o.x, &o.x2, rho);
        p2 -= correction(&o.p, &o.p, &o.p2, rho);
        xp -= (correction(&o.x, &o.p, &o.xp, rho) + correction(&o.p, &o.x, &adjoint(&o.xp), rho)).re;
    }
    let n = pr.n[0] + pr.n[1];
    CmMoments {
        n,
        r: dot(c, &xpsi).re / n,
        r2: x2.re / (n * n),
        p: dot(c, &ppsi).re / n,
        p2: p2.re / (n * n),
        rp_sym: xp / (n * n),
        source: MomentSource::Exact,
    }
}

/// Centre-of-mass moments of the mean-field product state.
pub fn cm_moments_mean_field(fields: &FieldPair) -> CmMoments {
    let ms = [field_moments(&fields.dark), field_moments(&fields.bright)];
    let n: f64 = ms.iter().map(|m| m.n).sum();
    let x: f64 = ms.iter().map(|m| m.n * m.x).sum();
    let p: f64 = ms.iter().map(|m| m.n * m.p).sum();
    // product state: ⟨AB⟩ = Σ_σ N_σ(⟨ab⟩_σ − ⟨a⟩_σ⟨b⟩_σ) + ⟨A⟩⟨B⟩
    let x2 = ms.iter().map(|m| m.n * (m.x2 - m.x * m.x)).sum::<f64>() + x * x;
    let p2 = ms.iter().map(|m| m.n * (m.p2 - m.p * m.p)).sum::<f64>() + p * p;
    let xp = ms.iter().map(|m| m.n * (m.rp_sym - 2.0 * m.x * m.p)).sum::<f64>() + 2.0 * x * p;
    CmMoments {
        n,
        r: x / n,
        r2: x2 / (n * n),
        p: p / n,
        p2: p2 / (n * n),
        rp_sym: xp / (n * n),
        source: MomentSource::MeanFieldFactorized,
    }
}

/// Harmonic centre-of-mass variance propagated from `t = 0` moments.
pub fn analytic_cm_variance(initial: &CmMoments, omega: f64, t: f64) -> f64 {
    let (s, c) = (omega * t).sin_cos();
    let s2 = (2.0 * omega * t).sin();
    initial.variance() * c * c
        + initial.momentum_variance() / (omega * omega) * s * s
        + initial.rp_sym / (2.0 * omega) * s2
        - initial.r * initial.p / omega * s2
}

/// Variance of `X^B = (1/N_B) Σ x_i^B`.
pub fn bright_cm_variance(state: &ManyBodyState, modes: &ModeBasis) -> f64 {
    let ops = SpeciesOperators::new(modes.bright());
    let rho = state.one_body_matrix(Species::Bright);
    let nb = state.basis().bright().n_particles() as f64;
    let xpsi = state.apply_one_body(Species::Bright, &ops.x);
    let x2 = (dot(&xpsi, &xpsi) - correction(&ops.x, &ops.x, &ops.x2, &rho)).re;
    let x = dot(state.coeffs(), &xpsi).re;
    x2 / (nb * nb) - (x / nb).powi(2)
}

/// Mean-field `σ²_{X^B}`: the one-body variance divided by `N_B`.
pub fn bright_cm_variance_mean_field(fields: &FieldPair) -> f64 {
    let m = field_moments(&fields.bright);
    if m.n > 0.0 {
        (m.x2 - m.x * m.x) / m.n
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fock::{product_state, FockBasis};
    use crate::grid::{Boundary, Grid};

    fn setup() -> (ModeBasis, Arc<FockBasis>) {
        let grid = Grid::new(256, -20.0, 20.0, Boundary::HardWall).unwrap();
        let modes = ModeBasis::harmonic(&grid, 0.5, 3, 3).unwrap();
        (modes, Arc::new(FockBasis::new(2, 3, 2, 3).unwrap()))
    }

    #[test]
    fn harmonic_operator_matrices() {
        let (modes, _) = setup();
        let ops = SpeciesOperators::new(modes.dark());
        let w: f64 = 0.5;
        // x_01 = 1/√(2ω), p_01 = −i √(ω/2), ⟨0|x²|0⟩ = 1/(2ω), ⟨0|p²|0⟩ = ω/2
        assert!((ops.x[0][1].re - 1.0 / (2.0 * w).sqrt()).abs() < 1e-10);
        assert!((ops.p[0][1] - C64::new(0.0, -(w / 2.0).sqrt())).norm() < 1e-10);
        assert!((ops.x2[0][0].re - 0.5 / w).abs() < 1e-10);
        assert!((ops.p2[0][0].re - 0.5 * w).abs() < 1e-10);
        // ⟨0|xp|0⟩ = i/2
        assert!((ops.xp[0][0] - C64::new(0.0, 0.5)).norm() < 1e-10);
    }

    #[test]
    fn product_state_moments_match_factorization() {
        let (modes, basis) = setup();
        let cd = [C64::new(0.8, 0.0), C64::new(0.0, 0.6), ZERO];
        let cb = [C64::new(0.6, 0.0), C64::new(0.8, 0.0), ZERO];
        let state = product_state(basis, &cd, &cb, 0.0);
        let fields = FieldPair::new(
            modes.dark().synthesize(&cd).scaled(C64::new(2f64.sqrt(), 0.0)),
            modes.bright().synthesize(&cb).scaled(C64::new(2f64.sqrt(), 0.0)),
            0.0,
        )
        .unwrap();
        let a = position_moments(&state, &modes);
        let b = position_moments_mean_field(&fields);
        for (u, v) in [
            (a.mean_dark, b.mean_dark),
            (a.sq_bright, b.sq_bright),
            (a.pair_dd, b.pair_dd),
            (a.pair_db, b.pair_db),
            (a.pair_bb, b.pair_bb),
        ] {
            assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }
        let ca = cm_moments(&state, &modes);
        let cb = cm_moments_mean_field(&fields);
        assert!((ca.r2 - cb.r2).abs() < 1e-10);
        assert!((ca.p2 - cb.p2).abs() < 1e-10);
        assert!((ca.rp_sym - cb.rp_sym).abs() < 1e-10);
        assert!((cm_variance(&a) - ca.variance()).abs() < 1e-10);
        assert!((bright_cm_variance(&state, &modes) - bright_cm_variance_mean_field(&fields)).abs() < 1e-10);
    }

    #[test]
    fn ground_state_variance_is_stationary() {
        let (modes, basis) = setup();
        let e0 = [C64::new(1.0, 0.0), ZERO, ZERO];
        let state = product_state(basis, &e0, &e0, 0.0);
        let m = cm_moments(&state, &modes);
        let n = 4.0;
        assert!((m.variance() - 1.0 / (2.0 * n * 0.5)).abs() < 1e-10);
        for t in [0.0, 1.0, 2.7, 10.0] {
            assert!((analytic_cm_variance(&m, 0.5, t) - 1.0 / (2.0 * n * 0.5)).abs() < 1e-10);
        }
    }

    #[test]
    fn single_bright_particle_is_one_body_variance() {
        let grid = Grid::new(256, -20.0, 20.0, Boundary::HardWall).unwrap();
        let modes = ModeBasis::harmonic(&grid, 0.5, 2, 3).unwrap();
        let basis = Arc::new(FockBasis::new(1, 2, 1, 3).unwrap());
        let cb = [C64::new(0.6, 0.0), C64::new(0.0, 0.8), ZERO];
        let state = product_state(basis, &[C64::new(1.0, 0.0), ZERO], &cb, 0.0);
        let ops = SpeciesOperators::new(modes.bright());
        let rho = state.one_body_matrix(Species::Bright);
        let x = one_body_trace(&ops.x, &rho).re;
        let x2 = one_body_trace(&ops.x2, &rho).re;
        assert!((bright_cm_variance(&state, &modes) - (x2 - x * x)).abs() < 1e-12);
    }
}
