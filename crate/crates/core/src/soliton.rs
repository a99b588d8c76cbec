//! Dark-bright soliton ansatz and the trapped imprint solver.
//!
//! A soliton is described by its initial position, its velocity in units of
//! the central speed of sound (`u/c = sin a`), its inverse width `d` and the
//! amplitude `η` of its bright filling. The imprint solver alternates between
//! tuning the background chemical potential so the dark component holds
//! `N_D` atoms and tuning the first bright amplitude so the bright component
//! holds `N_B` atoms, with the widths slaved to `η_j = √(μ cos²a_j − d_j²)`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid};
use crate::meanfield::{sound_speed, tune_chemical_potential_by, FieldPair, PhysicsParams, RelaxOptions, TuneOptions};

/// Threshold on the mean relative width change between sweeps.
pub const SWEEP_THRESHOLD: f64 = 1e-15;
pub const MAX_SWEEPS: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct SolitonSpec {
    pub x0: f64,
    /// Velocity in units of the speed of sound.
    pub velocity: f64,
    /// Phase angle, `sin a = u/c`.
    pub a: f64,
    /// Inverse width.
    pub d: f64,
    /// Bright amplitude.
    pub eta: f64,
    /// Background chemical potential the soliton was built on.
    pub mu: f64,
    /// Chemical potential of the bright component.
    pub mu_bright: f64,
}

impl SolitonSpec {
    pub fn new(x0: f64, velocity: f64, mu: f64, d: f64, eta: f64) -> Result<Self> {
        if !(velocity.abs() <= 1.0) {
            return Err(Error::Domain(format!("|u/c| must not exceed 1, got {velocity}")));
        }
        if !(d > 0.0) || !(eta >= 0.0) || !(mu > 0.0) {
            return Err(Error::Domain(format!(
                "soliton needs d > 0, eta >= 0 and mu > 0 (d = {d}, eta = {eta}, mu = {mu})"
            )));
        }
        Ok(SolitonSpec {
            x0,
            velocity,
            a: velocity.asin(),
            d,
            eta,
            mu,
            // stationary dark-bright value of the bright chemical potential
            mu_bright: mu - 0.5 * d * d,
        })
    }

    /// Absolute velocity `u = c sin a`.
    pub fn speed(&self) -> f64 {
        sound_speed(self.mu) * self.velocity
    }

    /// `x_j(t) = x⁰_j − u_j t`.
    pub fn position(&self, t: f64) -> f64 {
        self.x0 - self.speed() * t
    }

    /// Bright phase `θ_j(t) = ½(d² − d² tan²a) t + (μ′ − μ) t`.
    pub fn bright_phase(&self, t: f64) -> f64 {
        let tan = self.a.tan();
        0.5 * (self.d * self.d - self.d * self.d * tan * tan) * t + (self.mu_bright - self.mu) * t
    }

    /// Deviation from the untrapped width/amplitude relation.
    pub fn relation_residual(&self) -> f64 {
        self.eta * self.eta + self.d * self.d - self.mu * self.a.cos().powi(2)
    }
}

/// `η = √(μ cos²a − d²)`.
pub fn eta_from_width(mu: f64, a: f64, d: f64) -> Result<f64> {
    let radicand = mu * a.cos().powi(2) - d * d;
    if radicand < 0.0 {
        if radicand > -1e-14 * mu.abs().max(1.0) {
            return Ok(0.0);
        }
        return Err(Error::Domain(format!(
            "soliton too narrow for the background: mu cos^2 a - d^2 = {radicand:.6e}"
        )));
    }
    Ok(radicand.sqrt())
}

/// Inverse of [`eta_from_width`]: `d = √(μ cos²a − η²)`.
pub fn width_from_eta(mu: f64, a: f64, eta: f64) -> Result<f64> {
    let radicand = mu * a.cos().powi(2) - eta * eta;
    if !(radicand > 0.0) {
        return Err(Error::Domain(format!(
            "bright amplitude {eta} leaves no positive inverse width (mu cos^2 a - eta^2 = {radicand:.6e})"
        )));
    }
    Ok(radicand.sqrt())
}

fn dark_factor(spec: &SolitonSpec, x: f64, t: f64) -> C64 {
    let (s, c) = spec.a.sin_cos();
    C64::new(c * (spec.d * (x - spec.position(t))).tanh(), s)
}

/// `φ̃ᴰ(x;t) = φ̃₀(x) Π_j [cos a_j tanh(d_j(x − x_j(t))) + i sin a_j]`.
pub fn dark_wavefunction(background: &ComplexField, solitons: &[SolitonSpec], t: f64) -> ComplexField {
    background.map(|x, phi0| solitons.iter().fold(phi0, |acc, spec| acc * dark_factor(spec, x, t)))
}

fn sech(z: f64) -> f64 {
    let c = z.cosh();
    if c.is_finite() {
        1.0 / c
    } else {
        0.0
    }
}

/// `φ̃ᴮ(x;t) = Σ_j η_j sech(d_j(x − x_j(t))) exp[i(d_j tan a_j x − θ_j(t))]`,
/// in-phase superposition.
pub fn bright_wavefunction(grid: &Grid, solitons: &[SolitonSpec], t: f64) -> ComplexField {
    ComplexField::from_fn(grid, |x| {
        solitons
            .iter()
            .filter(|s| s.eta > 0.0 && s.a.cos() > 0.0)
            .map(|s| {
                let envelope = s.eta * sech(s.d * (x - s.position(t)));
                C64::from_polar(envelope, s.d * s.a.tan() * x - s.bright_phase(t))
            })
            .sum()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImprintProblem {
    pub n_dark: f64,
    pub n_bright: f64,
    pub positions: Vec<f64>,
    /// `u_j/c`.
    pub velocities: Vec<f64>,
    /// `η_j/η_1`; the first entry is 1.
    pub relative_amplitudes: Vec<f64>,
    pub mu_guess: f64,
    pub d_guess: Vec<f64>,
}

impl ImprintProblem {
    pub fn single(n_dark: f64, n_bright: f64, x0: f64, velocity: f64) -> Self {
        ImprintProblem {
            n_dark,
            n_bright,
            positions: vec![x0],
            velocities: vec![velocity],
            relative_amplitudes: vec![1.0],
            mu_guess: 6.0,
            d_guess: vec![1.5],
        }
    }

    /// Two identical in-phase solitons at `∓x0`, moving towards each other.
    pub fn symmetric_pair(n_dark: f64, n_bright: f64, x0: f64, velocity: f64) -> Self {
        let x0 = x0.abs();
        ImprintProblem {
            n_dark,
            n_bright,
            positions: vec![-x0, x0],
            velocities: vec![velocity, -velocity],
            relative_amplitudes: vec![1.0, 1.0],
            mu_guess: 6.0,
            d_guess: vec![1.5, 1.5],
        }
    }

    /// Starting guesses from the Thomas-Fermi background: `μ_TF + 0.1` with
    /// `μ_TF = (3 g N_D Ω / 4√2)^{2/3}`, and `d = 0.6 √μ` for every soliton.
    /// Useful for small particle numbers where the preset guesses are far off.
    pub fn with_thomas_fermi_guesses(mut self, omega: f64, g: f64) -> Self {
        let mu_tf = (3.0 * g * self.n_dark * omega / (4.0 * std::f64::consts::SQRT_2)).powf(2.0 / 3.0);
        self.mu_guess = mu_tf + 0.1;
        self.d_guess = vec![0.6 * self.mu_guess.sqrt(); self.n_solitons()];
        self
    }

    pub fn n_solitons(&self) -> usize {
        self.positions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let ns = self.positions.len();
        if !(1..=2).contains(&ns) {
            return Err(Error::Config(format!("1 or 2 solitons supported, got {ns}")));
        }
        if self.velocities.len() != ns || self.relative_amplitudes.len() != ns || self.d_guess.len() != ns {
            return Err(Error::Config(
                "positions, velocities, relative amplitudes and width guesses must have equal length".into(),
            ));
        }
        if !(self.n_dark > 0.0 && self.n_bright > 0.0) {
            return Err(Error::Config("particle-number targets must be positive".into()));
        }
        if !(self.mu_guess > 0.0) || self.d_guess.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Config(
                "chemical-potential and width guesses must be positive".into(),
            ));
        }
        if self.velocities.iter().any(|u| !(u.abs() < 1.0)) {
            return Err(Error::Config("soliton velocities need |u/c| < 1".into()));
        }
        if (self.relative_amplitudes[0] - 1.0).abs() > 1e-15 || self.relative_amplitudes.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Config(
                "relative amplitudes must be positive with the first equal to 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub sweep: usize,
    pub mu: f64,
    pub d: Vec<f64>,
    pub eta1: f64,
    /// `(1/N_S) Σ |d_j^(k) − d_j^(k−1)| / d_j^(k−1)`.
    pub residual: f64,
    pub mu_change: f64,
}

/// Which bound set the effective sweep threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdBound {
    Nominal,
    MachinePrecision,
}

#[derive(Clone, Debug)]
pub struct Imprint {
    pub mu: f64,
    pub background: ComplexField,
    pub specs: Vec<SolitonSpec>,
    pub fields: FieldPair,
    pub sweeps: Vec<SweepRecord>,
    pub threshold: f64,
    pub threshold_bound: ThresholdBound,
    pub warnings: Vec<String>,
}

impl Imprint {
    /// Sweep log as CSV (`sweep,mu,d_1[,d_2],eta_1,residual`).
    pub fn convergence_csv(&self) -> String {
        let ns = self.specs.len();
        let mut out = String::from("sweep,mu");
        for j in 1..=ns {
            out.push_str(&format!(",d_{j}"));
        }
        out.push_str(",eta_1,residual,mu_change\n");
        for r in &self.sweeps {
            out.push_str(&format!("{},{}", r.sweep, crate::io::csv::fmt_f64(r.mu)));
            for d in &r.d {
                out.push(',');
                out.push_str(&crate::io::csv::fmt_f64(*d));
            }
            out.push_str(&format!(
                ",{},{},{}\n",
                crate::io::csv::fmt_f64(r.eta1),
                crate::io::csv::fmt_f64(r.residual),
                crate::io::csv::fmt_f64(r.mu_change)
            ));
        }
        out
    }
}

fn specs_for(problem: &ImprintProblem, mu: f64, d: &[f64], eta1: f64) -> Result<Vec<SolitonSpec>> {
    (0..problem.n_solitons())
        .map(|j| {
            SolitonSpec::new(
                problem.positions[j],
                problem.velocities[j],
                mu,
                d[j],
                eta1 * problem.relative_amplitudes[j],
            )
        })
        .collect()
}

/// Widths slaved to `η_1` through the relative amplitudes.
fn widths_for(problem: &ImprintProblem, mu: f64, eta1: f64) -> Result<Vec<f64>> {
    (0..problem.n_solitons())
        .map(|j| {
            let a = problem.velocities[j].asin();
            width_from_eta(mu, a, eta1 * problem.relative_amplitudes[j])
        })
        .collect()
}

/// Largest `η_1` that keeps every width positive.
fn eta1_ceiling(problem: &ImprintProblem, mu: f64) -> f64 {
    (0..problem.n_solitons())
        .map(|j| {
            let a = problem.velocities[j].asin();
            (mu * a.cos().powi(2)).sqrt() / problem.relative_amplitudes[j]
        })
        .fold(f64::INFINITY, f64::min)
}

fn bright_number(grid: &Grid, problem: &ImprintProblem, mu: f64, eta1: f64) -> Result<f64> {
    let d = widths_for(problem, mu, eta1)?;
    let specs = specs_for(problem, mu, &d, eta1)?;
    Ok(bright_wavefunction(grid, &specs, 0.0).norm_sqr())
}

/// Newton-Raphson on `η_1` so the bright component holds `N_B` atoms.
fn tune_eta1(grid: &Grid, problem: &ImprintProblem, mu: f64, eta_start: f64) -> Result<f64> {
    let ceiling = eta1_ceiling(problem, mu);
    let target = problem.n_bright;
    let mut eta = eta_start.clamp(1e-6 * ceiling, ceiling * (1.0 - 1e-9));
    let mut history = Vec::new();
    for _ in 0..200 {
        let n = bright_number(grid, problem, mu, eta)?;
        let rel = (n - target).abs() / target;
        history.push(rel);
        if rel < 1e-14 {
            return Ok(eta);
        }
        let h = 1e-7 * eta;
        let h = if eta + h >= ceiling { -h } else { h };
        let slope = (bright_number(grid, problem, mu, eta + h)? - n) / h;
        if !(slope > 0.0) {
            return Err(Error::convergence(
                "bright-amplitude Newton (non-monotone N_B)",
                history,
            ));
        }
        let mut next = eta - (n - target) / slope;
        // stay inside (0, ceiling)
        if next <= 0.0 {
            next = 0.5 * eta;
        } else if next >= ceiling {
            next = 0.5 * (eta + ceiling);
        }
        if (next - eta).abs() <= 4.0 * f64::EPSILON * eta {
            if rel < 1e-12 {
                return Ok(eta);
            }
            return Err(Error::convergence("bright-amplitude Newton (stagnated)", history));
        }
        eta = next;
    }
    Err(Error::convergence("bright-amplitude Newton", history))
}

/// Solve the trapped imprint problem: returns the converged `(μ, d_j, η_j)`,
/// the relaxed background and the normalized dark/bright pair at `t = 0`.
pub fn imprint(problem: &ImprintProblem, grid: &Grid, params: &PhysicsParams) -> Result<Imprint> {
    problem.validate()?;
    params.validate()?;
    let ns = problem.n_solitons();

    let mut warnings = Vec::new();
    if ns == 2 {
        let sep = (problem.positions[0] - problem.positions[1]).abs();
        let widest = problem.d_guess.iter().fold(f64::INFINITY, |m, d| m.min(*d));
        if sep < 3.0 / widest {
            warnings.push(format!(
                "soliton separation {sep} is below 3 widths (3/d = {})",
                3.0 / widest
            ));
        }
    }

    let tune_opts = TuneOptions {
        rel_tolerance: 1e-13,
        max_iter: 100,
        relax: RelaxOptions::default(),
    };
    let threshold = SWEEP_THRESHOLD.max(16.0 * f64::EPSILON);
    let threshold_bound = if threshold > SWEEP_THRESHOLD {
        ThresholdBound::MachinePrecision
    } else {
        ThresholdBound::Nominal
    };

    let mut mu = problem.mu_guess;
    let mut d = problem.d_guess.clone();
    let a1 = problem.velocities[0].asin();
    let mut eta1 = eta_from_width(mu, a1, d[0]).unwrap_or(0.0);
    if eta1 == 0.0 {
        eta1 = 0.5 * eta1_ceiling(problem, mu);
    }
    let mut background: Option<ComplexField> = None;
    let mut sweeps: Vec<SweepRecord> = Vec::new();

    for sweep in 1..=MAX_SWEEPS {
        // (a)-(c): μ such that the imprinted dark component holds N_D atoms
        let d_now = d.clone();
        let count = |bg: &ComplexField, mu_trial: f64| -> Result<f64> {
            // the dark factor depends on (a_j, d_j, x0_j) only; η is irrelevant here
            let specs: Vec<SolitonSpec> = (0..ns)
                .map(|j| SolitonSpec::new(problem.positions[j], problem.velocities[j], mu_trial, d_now[j], 0.0))
                .collect::<Result<_>>()?;
            Ok(dark_wavefunction(bg, &specs, 0.0).norm_sqr())
        };
        let tuned =
            tune_chemical_potential_by(params, problem.n_dark, grid, mu, background.as_ref(), &tune_opts, count)?;
        let mu_change = (tuned.mu - mu).abs() / mu;
        mu = tuned.mu;
        background = Some(tuned.background);

        // (d): η_1 such that the bright component holds N_B atoms
        eta1 = tune_eta1(grid, problem, mu, eta1)?;
        let d_new = widths_for(problem, mu, eta1)?;

        let residual = d_new
            .iter()
            .zip(&d)
            .map(|(new, old)| (new - old).abs() / old)
            .sum::<f64>()
            / ns as f64;
        d = d_new;
        sweeps.push(SweepRecord {
            sweep,
            mu,
            d: d.clone(),
            eta1,
            residual,
            mu_change,
        });
        if residual < threshold && mu_change < threshold {
            break;
        }
        if sweep == MAX_SWEEPS {
            return Err(Error::Convergence {
                stage: "imprint fixed point",
                iterations: sweep,
                residual,
                history: sweeps.iter().map(|s| s.residual).collect(),
            });
        }
    }

    let background = background.expect("at least one sweep ran");
    let specs = specs_for(problem, mu, &d, eta1)?;
    let dark = dark_wavefunction(&background, &specs, 0.0);
    let bright = bright_wavefunction(grid, &specs, 0.0);
    let dark = dark.scaled(C64::new((problem.n_dark / dark.norm_sqr()).sqrt(), 0.0));
    let bright = bright.scaled(C64::new((problem.n_bright / bright.norm_sqr()).sqrt(), 0.0));
    let mut fields = FieldPair::new(dark, bright, 0.0)?;
    fields.mu_dark = Some(mu);
    fields.mu_bright = Some(specs[0].mu_bright);

    Ok(Imprint {
        mu,
        background,
        specs,
        fields,
        sweeps,
        threshold,
        threshold_bound,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use crate::meanfield::relax_background;

    #[test]
    fn near_sonic_dark_soliton_fades_into_background() {
        let grid = Grid::new(801, -20.0, 20.0, Boundary::HardWall).unwrap();
        let bg = ComplexField::new(grid.clone(), vec![C64::new(2.0, 0.0); 801]).unwrap();
        for u in [0.999_f64, 0.9995] {
            let a = u.asin();
            let d = (4.0 * a.cos().powi(2)).sqrt();
            let spec = SolitonSpec::new(0.0, u, 4.0, d, 0.0).unwrap();
            let dens = dark_wavefunction(&bg, &[spec], 0.0).density();
            // deepest point sits on a node: relative dip = cos²a
            let dip = dens.iter().map(|r| (4.0 - r) / 4.0).fold(0.0, f64::max);
            assert!((dip - a.cos().powi(2)).abs() < 1e-12, "{dip}");
        }
    }

    #[test]
    fn eta_from_width_values() {
        let eta = eta_from_width(6.42, 0.5_f64.asin(), 1.42).unwrap();
        // 6.42·0.75 − 1.42² = 4.815 − 2.0164
        assert!((eta - 2.7986_f64.sqrt()).abs() < 1e-12);
        assert!((eta - 1.672_901).abs() < 1e-6);
        assert_eq!(eta_from_width(4.0, 0.0, 2.0).unwrap(), 0.0);
        assert!((eta_from_width(4.0, 0.0, 1.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!(matches!(eta_from_width(4.0, 0.0, 2.5), Err(Error::Domain(_))));
    }

    #[test]
    fn spec_rejects_superluminal_velocity() {
        assert!(SolitonSpec::new(0.0, 1.2, 6.0, 1.0, 1.0).is_err());
        assert!(SolitonSpec::new(0.0, 0.5, 6.0, 0.0, 1.0).is_err());
        let s = SolitonSpec::new(-2.5, 0.5, 6.42, 1.42, 1.88).unwrap();
        assert!((s.a - std::f64::consts::FRAC_PI_6).abs() < 1e-15);
        assert_eq!(s.bright_phase(0.0), 0.0);
        assert!((s.position(2.0) - (-2.5 - 2.0 * 0.5 * 6.42_f64.sqrt())).abs() < 1e-14);
    }

    fn background() -> ComplexField {
        let grid = Grid::new(1200, -60.0, 60.0, Boundary::HardWall).unwrap();
        relax_background(&PhysicsParams::default(), 6.42, &grid, None).unwrap()
    }

    #[test]
    fn sonic_soliton_leaves_background_untouched() {
        let bg = background();
        let spec = SolitonSpec::new(0.0, 1.0, 6.42, 1.0, 0.0).unwrap();
        let dark = dark_wavefunction(&bg, &[spec], 0.0);
        for (v, b) in dark.values().iter().zip(bg.values()) {
            assert!((v - C64::new(0.0, 1.0) * b).norm() < 1e-15);
        }
    }

    #[test]
    fn black_soliton_has_a_node() {
        let grid = Grid::new(1201, -60.0, 60.0, Boundary::HardWall).unwrap();
        let bg = relax_background(&PhysicsParams::default(), 6.42, &grid, None).unwrap();
        let spec = SolitonSpec::new(0.0, 0.0, 6.42, 1.5, 0.0).unwrap();
        let dark = dark_wavefunction(&bg, &[spec], 0.0);
        assert_eq!(dark.values()[600].norm(), 0.0);
    }

    #[test]
    fn gray_pair_node_density() {
        let grid = Grid::new(1201, -60.0, 60.0, Boundary::HardWall).unwrap();
        let bg = relax_background(&PhysicsParams::default(), 6.47, &grid, None).unwrap();
        let s1 = SolitonSpec::new(-2.5, 0.5, 6.47, 1.82, 0.0).unwrap();
        let s2 = SolitonSpec::new(2.5, 0.5, 6.47, 1.82, 0.0).unwrap();
        let dark = dark_wavefunction(&bg, &[s1, s2], 0.0);
        for x in [-2.5, 2.5] {
            let i = ((x - grid.x_min()) / grid.spacing()).round() as usize;
            assert!((grid.x(i) - x).abs() < 1e-12);
            let ratio = dark.values()[i].norm_sqr() / bg.values()[i].norm_sqr();
            assert!((ratio - 0.25).abs() < 0.02 * 0.25, "{ratio}");
        }
    }

    #[test]
    fn bright_soliton_shape() {
        let grid = Grid::new(2001, -40.0, 40.0, Boundary::HardWall).unwrap();
        let s = SolitonSpec::new(0.0, 0.0, 6.42, 1.42, 1.88).unwrap();
        let b = bright_wavefunction(&grid, std::slice::from_ref(&s), 0.0);
        assert!((b.values()[1000].norm() - 1.88).abs() < 1e-15);
        // no phase ramp at a = 0
        assert!(b.values().iter().all(|v| v.im.abs() < 1e-15));
        let n = b.norm_sqr();
        assert!((n - 2.0 * 1.88 * 1.88 / 1.42).abs() < 1e-10, "{n}");
        assert!((n - 4.98).abs() < 0.01);
    }

    #[test]
    fn problem_validation() {
        let mut p = ImprintProblem::single(300.0, 5.0, -2.5, 0.5);
        assert!(p.validate().is_ok());
        p.velocities = vec![1.0];
        assert!(p.validate().is_err());
        let mut p = ImprintProblem::symmetric_pair(300.0, 5.0, 2.5, 0.5);
        p.d_guess.pop();
        assert!(p.validate().is_err());
        let mut p = ImprintProblem::single(0.0, 5.0, -2.5, 0.5);
        assert!(p.validate().is_err());
        p.n_dark = 300.0;
        p.positions = vec![0.0, 1.0, 2.0];
        assert!(p.validate().is_err());
    }

    #[test]
    fn thomas_fermi_guesses() {
        // (3·300·0.1 / 4√2)^{2/3} = 6.32574...
        let p = ImprintProblem::symmetric_pair(300.0, 5.0, 2.5, 0.5).with_thomas_fermi_guesses(0.1, 1.0);
        assert!((p.mu_guess - 6.425745).abs() < 1e-6, "{}", p.mu_guess);
        assert_eq!(p.d_guess.len(), 2);
        assert!((p.d_guess[0] - 0.6 * p.mu_guess.sqrt()).abs() < 1e-15);
    }
}
