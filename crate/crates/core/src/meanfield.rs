//! Coupled Gross–Pitaevskii equations for the dark (`D`) and bright (`B`)
//! components: ground-state relaxation by Newton–Krylov, chemical-potential
//! tuning by Newton–Raphson, and Strang split-step propagation.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{apply_kinetic, inner_product, Boundary, ComplexField, Grid};

/// Trap and coupling constants in oscillator units (`ħ = m = 1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicsParams {
    pub omega: f64,
    pub g_dd: f64,
    pub g_bb: f64,
    pub g_db: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams::manakov(0.1, 1.0)
    }
}

impl PhysicsParams {
    /// All couplings equal.
    pub fn manakov(omega: f64, g: f64) -> Self {
        PhysicsParams {
            omega,
            g_dd: g,
            g_bb: g,
            g_db: g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega, self.g_dd, self.g_bb, self.g_db];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config(format!(
                "trap frequency and couplings must be finite and non-negative: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn trap(&self, x: f64) -> f64 {
        0.5 * self.omega * self.omega * x * x
    }

    pub fn trap_on(&self, grid: &Grid) -> Vec<f64> {
        grid.nodes().into_iter().map(|x| self.trap(x)).collect()
    }
}

/// Mean-field state: one orbital per species, normalized to its particle
/// number.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPair {
    pub dark: ComplexField,
    pub bright: ComplexField,
    pub time: f64,
    pub mu_dark: Option<f64>,
    pub mu_bright: Option<f64>,
}

impl FieldPair {
    pub fn new(dark: ComplexField, bright: ComplexField, time: f64) -> Result<Self> {
        if dark.grid() != bright.grid() {
            return Err(Error::Shape("dark and bright fields on different grids".into()));
        }
        Ok(FieldPair {
            dark,
            bright,
            time,
            mu_dark: None,
            mu_bright: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.dark.grid()
    }

    pub fn n_dark(&self) -> f64 {
        self.dark.norm_sqr()
    }

    pub fn n_bright(&self) -> f64 {
        self.bright.norm_sqr()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RelaxOptions {
    /// Max-norm of the stationary residual at convergence.
    pub tolerance: f64,
    pub max_newton: usize,
    pub max_krylov: usize,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions {
            tolerance: 1e-12,
            max_newton: 200,
            max_krylov: 2000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RelaxReport {
    pub background: ComplexField,
    pub residual: f64,
    pub newton_iterations: usize,
    pub krylov_iterations: usize,
}

/// `max(0, (μ − V)/g)^{1/2}`.
pub fn thomas_fermi(params: &PhysicsParams, mu: f64, grid: &Grid) -> ComplexField {
    let g = params.g_dd.max(f64::MIN_POSITIVE);
    let mut f = ComplexField::from_fn(grid, |x| C64::new(((mu - params.trap(x)) / g).max(0.0).sqrt(), 0.0));
    if grid.boundary() == Boundary::HardWall {
        let n = grid.n_points();
        f.values_mut()[0] = C64::new(0.0, 0.0);
        f.values_mut()[n - 1] = C64::new(0.0, 0.0);
    }
    f
}

/// Pointwise residual of `[−½∂² + V + g|φ|² − μ]φ`.
pub fn stationary_residual(params: &PhysicsParams, mu: f64, field: &ComplexField) -> Vec<C64> {
    let kin = apply_kinetic(field);
    let grid = field.grid();
    field
        .values()
        .iter()
        .zip(kin.values())
        .enumerate()
        .map(|(i, (&phi, &k))| k + (params.trap(grid.x(i)) + params.g_dd * phi.norm_sqr() - mu) * phi)
        .collect()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Real-valued machinery for the background problem.
struct BackgroundProblem<'a> {
    grid: &'a Grid,
    mu: f64,
    g: f64,
    trap: Vec<f64>,
    kinetic: Vec<C64>,
    precond: Vec<C64>,
}

impl<'a> BackgroundProblem<'a> {
    fn new(params: &PhysicsParams, mu: f64, grid: &'a Grid) -> Self {
        let shift = mu.max(1.0);
        BackgroundProblem {
            grid,
            mu,
            g: params.g_dd,
            trap: params.trap_on(grid),
            kinetic: grid.spectral_table(|k| C64::new(0.5 * k * k, 0.0)),
            precond: grid.spectral_table(|k| C64::new(1.0 / (0.5 * k * k + shift), 0.0)),
        }
    }

    fn apply_table(&self, v: &[f64], table: &[C64]) -> Vec<f64> {
        let c: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        let mut out: Vec<f64> = self
            .grid
            .apply_spectral_table(&c, table)
            .into_iter()
            .map(|z| z.re)
            .collect();
        if self.grid.boundary() == Boundary::HardWall {
            let n = out.len();
            out[0] = 0.0;
            out[n - 1] = 0.0;
        }
        out
    }

    fn residual(&self, phi: &[f64]) -> Vec<f64> {
        let k = self.apply_table(phi, &self.kinetic);
        (0..phi.len())
            .map(|i| k[i] + (self.trap[i] + self.g * phi[i] * phi[i] - self.mu) * phi[i])
            .collect()
    }

    fn jacobian(&self, phi: &[f64], v: &[f64]) -> Vec<f64> {
        let k = self.apply_table(v, &self.kinetic);
        (0..v.len())
            .map(|i| k[i] + (self.trap[i] + 3.0 * self.g * phi[i] * phi[i] - self.mu) * v[i])
            .collect()
    }

    /// Preconditioned conjugate gradients on `J δ = rhs`. Returns the
    /// solution and the iteration count.
    fn solve(&self, phi: &[f64], rhs: &[f64], rel_tol: f64, max_iter: usize) -> (Vec<f64>, usize) {
        let n = rhs.len();
        let mut x = vec![0.0; n];
        let mut r = rhs.to_vec();
        let mut z = self.apply_table(&r, &self.precond);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let target = rel_tol * dot(rhs, rhs).sqrt();
        for it in 0..max_iter {
            if dot(&r, &r).sqrt() <= target {
                return (x, it);
            }
            let ap = self.jacobian(phi, &p);
            let pap = dot(&p, &ap);
            if pap <= 0.0 || !pap.is_finite() {
                // indefinite direction: keep what we have
                return (x, it);
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            z = self.apply_table(&r, &self.precond);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        (x, max_iter)
    }
}

/// Relax the single-component background `φ̃₀` at fixed `μ`.
pub fn relax_background(
    params: &PhysicsParams,
    mu: f64,
    grid: &Grid,
    initial_guess: Option<&ComplexField>,
) -> Result<ComplexField> {
    relax_background_with(params, mu, grid, initial_guess, &RelaxOptions::default()).map(|r| r.background)
}

pub fn relax_background_with(
    params: &PhysicsParams,
    mu: f64,
    grid: &Grid,
    initial_guess: Option<&ComplexField>,
    opts: &RelaxOptions,
) -> Result<RelaxReport> {
    params.validate()?;
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("chemical potential must be positive, got {mu}")));
    }
    let guess = match initial_guess {
        Some(f) => {
            if f.grid() != grid {
                return Err(Error::Shape("initial guess lives on another grid".into()));
            }
            f.clone()
        }
        None => thomas_fermi(params, mu, grid),
    };
    let mut phi: Vec<f64> = guess.values().iter().map(|v| v.norm()).collect();
    if phi.iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("initial guess is identically zero".into()));
    }
    if grid.boundary() == Boundary::HardWall {
        let n = phi.len();
        phi[0] = 0.0;
        phi[n - 1] = 0.0;
    }

    let problem = BackgroundProblem::new(params, mu, grid);
    let mut f = problem.residual(&phi);
    let mut res = max_norm(&f);
    let mut history = vec![res];
    let mut krylov_total = 0;
    let mut newton = 0;
    while res > opts.tolerance {
        if newton >= opts.max_newton {
            return Err(Error::convergence("Newton-Krylov background relaxation", history));
        }
        newton += 1;
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let (delta, its) = problem.solve(&phi, &rhs, 1e-11, opts.max_krylov);
        krylov_total += its;

        // backtracking on the max-norm residual
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let trial: Vec<f64> = phi.iter().zip(&delta).map(|(p, d)| p + step * d).collect();
            let ft = problem.residual(&trial);
            let rt = max_norm(&ft);
            if rt.is_finite() && rt < res {
                accepted = Some((trial, ft, rt));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((p, ft, rt)) => {
                phi = p;
                f = ft;
                res = rt;
                history.push(res);
            }
            None => {
                history.push(res);
                return Err(Error::convergence("Newton-Krylov background relaxation", history));
            }
        }
    }

    // tails far outside the cloud sit at round-off level and may carry
    // either sign; they are left untouched so the residual stays certified
    let background = ComplexField::from_real(grid, &phi)?;
    Ok(RelaxReport {
        background,
        residual: res,
        newton_iterations: newton,
        krylov_iterations: krylov_total,
    })
}

#[derive(Clone, Debug)]
pub struct TuneReport {
    pub mu: f64,
    pub background: ComplexField,
    pub particle_number: f64,
    pub iterations: usize,
    /// A Newton iterate went non-positive and was pulled back.
    pub clamped: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct TuneOptions {
    pub rel_tolerance: f64,
    pub max_iter: usize,
    pub relax: RelaxOptions,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            rel_tolerance: 1e-10,
            max_iter: 100,
            relax: RelaxOptions::default(),
        }
    }
}

/// Newton–Raphson on `μ` so that the background holds `target_n` particles.
pub fn tune_chemical_potential(
    params: &PhysicsParams,
    target_n: f64,
    grid: &Grid,
    mu_guess: f64,
) -> Result<(f64, ComplexField)> {
    let report = tune_chemical_potential_by(
        params,
        target_n,
        grid,
        mu_guess,
        None,
        &TuneOptions::default(),
        |bg, _| Ok(bg.norm_sqr()),
    )?;
    Ok((report.mu, report.background))
}

/// Generic tuner: `count(background, μ)` gives the particle number to match,
/// e.g. the norm of a soliton imprinted on the background. The derivative is
/// a forward difference with `δμ = 10⁻⁶ μ`.
pub fn tune_chemical_potential_by<F>(
    params: &PhysicsParams,
    target_n: f64,
    grid: &Grid,
    mu_guess: f64,
    background_guess: Option<&ComplexField>,
    opts: &TuneOptions,
    mut count: F,
) -> Result<TuneReport>
where
    F: FnMut(&ComplexField, f64) -> Result<f64>,
{
    if !(target_n > 0.0) || !(mu_guess > 0.0) {
        return Err(Error::Domain(format!(
            "target particle number and chemical potential guess must be positive ({target_n}, {mu_guess})"
        )));
    }
    let mut mu = mu_guess;
    let mut clamped = false;
    let mut bg = relax_background_with(params, mu, grid, background_guess, &opts.relax)?.background;
    let mut n = count(&bg, mu)?;
    let mut history = vec![(n - target_n).abs() / target_n];
    for it in 0..opts.max_iter {
        let rel = (n - target_n).abs() / target_n;
        if rel < opts.rel_tolerance {
            return Ok(TuneReport {
                mu,
                background: bg,
                particle_number: n,
                iterations: it,
                clamped,
            });
        }
        let dmu = 1e-6 * mu;
        let bg_plus = relax_background_with(params, mu + dmu, grid, Some(&bg), &opts.relax)?.background;
        let n_plus = count(&bg_plus, mu + dmu)?;
        let slope = (n_plus - n) / dmu;
        if !(slope > 0.0) {
            return Err(Error::convergence(
                "chemical-potential Newton (non-monotone N(mu))",
                history,
            ));
        }
        let mut next = mu - (n - target_n) / slope;
        if next <= 0.0 {
            next = 0.5 * mu;
            clamped = true;
        }
        if (next - mu).abs() <= 4.0 * f64::EPSILON * mu {
            // at the floating-point floor; accept if the loose tolerance holds
            if rel < 1e-10 {
                return Ok(TuneReport {
                    mu,
                    background: bg,
                    particle_number: n,
                    iterations: it + 1,
                    clamped,
                });
            }
            return Err(Error::convergence("chemical-potential Newton (stagnated)", history));
        }
        mu = next;
        bg = relax_background_with(params, mu, grid, Some(&bg_plus), &opts.relax)?.background;
        n = count(&bg, mu)?;
        history.push((n - target_n).abs() / target_n);
    }
    Err(Error::convergence("chemical-potential Newton", history))
}

/// Strang split-step integrator for the coupled GP equations.
pub struct SplitStep {
    params: PhysicsParams,
    dt: f64,
    trap: Vec<f64>,
    kinetic: Vec<C64>,
}

impl SplitStep {
    pub fn new(grid: &Grid, params: PhysicsParams, dt: f64) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        Ok(SplitStep {
            params,
            dt,
            trap: params.trap_on(grid),
            kinetic: grid.kinetic_propagator(dt),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn potential(&self, state: &mut FieldPair, tau: f64) {
        let p = &self.params;
        let (dark, bright) = (state.dark.values_mut(), state.bright.values_mut());
        for i in 0..dark.len() {
            let nd = dark[i].norm_sqr();
            let nb = bright[i].norm_sqr();
            let vd = self.trap[i] + p.g_dd * nd + p.g_db * nb;
            let vb = self.trap[i] + p.g_bb * nb + p.g_db * nd;
            dark[i] *= C64::from_polar(1.0, -vd * tau);
            bright[i] *= C64::from_polar(1.0, -vb * tau);
        }
    }

    fn kinetic(&self, state: &mut FieldPair) {
        let grid = state.dark.grid().clone();
        grid.apply_spectral_table_in_place(state.dark.values_mut(), &self.kinetic);
        grid.apply_spectral_table_in_place(state.bright.values_mut(), &self.kinetic);
    }

    /// Advance by `n_steps`; `step_offset` only labels blow-up errors.
    pub fn advance(&self, state: &mut FieldPair, n_steps: usize, step_offset: usize) -> Result<()> {
        if n_steps == 0 {
            return Ok(());
        }
        // interior half-steps merge: the potential step leaves densities unchanged
        self.potential(state, 0.5 * self.dt);
        for s in 0..n_steps {
            self.kinetic(state);
            let tau = if s + 1 == n_steps { 0.5 * self.dt } else { self.dt };
            self.potential(state, tau);
            let probe = state.dark.values()[state.dark.values().len() / 2]
                + state.bright.values()[state.bright.values().len() / 3];
            if !probe.re.is_finite() || !probe.im.is_finite() || s + 1 == n_steps {
                let finite = state
                    .dark
                    .values()
                    .iter()
                    .chain(state.bright.values())
                    .all(|v| v.re.is_finite() && v.im.is_finite());
                if !finite {
                    return Err(Error::BlowUp {
                        step: step_offset + s + 1,
                    });
                }
            }
        }
        state.time += n_steps as f64 * self.dt;
        Ok(())
    }
}

/// Propagate the coupled GP equations for `n_steps` of size `dt`.
pub fn propagate_gp(state: &FieldPair, params: &PhysicsParams, dt: f64, n_steps: usize) -> Result<FieldPair> {
    let stepper = SplitStep::new(state.grid(), *params, dt)?;
    let mut out = state.clone();
    stepper.advance(&mut out, n_steps, 0)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpEnergy {
    pub kinetic: f64,
    pub trap: f64,
    pub interaction_dd: f64,
    pub interaction_bb: f64,
    pub interaction_db: f64,
}

impl GpEnergy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.trap + self.interaction_dd + self.interaction_bb + self.interaction_db
    }
}

pub fn gp_energy_terms(state: &FieldPair, params: &PhysicsParams) -> GpEnergy {
    let grid = state.grid();
    let kin = |f: &ComplexField| inner_product(f, &apply_kinetic(f)).map(|z| z.re).unwrap_or(f64::NAN);
    let nd = state.dark.density();
    let nb = state.bright.density();
    let trap = params.trap_on(grid);
    let integrate = |f: &dyn Fn(usize) -> f64| grid.integrate(&(0..nd.len()).map(f).collect::<Vec<_>>());
    GpEnergy {
        kinetic: kin(&state.dark) + kin(&state.bright),
        trap: integrate(&|i| trap[i] * (nd[i] + nb[i])),
        interaction_dd: 0.5 * params.g_dd * integrate(&|i| nd[i] * nd[i]),
        interaction_bb: 0.5 * params.g_bb * integrate(&|i| nb[i] * nb[i]),
        interaction_db: params.g_db * integrate(&|i| nd[i] * nb[i]),
    }
}

/// Total mean-field energy functional.
pub fn gp_energy(state: &FieldPair, params: &PhysicsParams) -> f64 {
    gp_energy_terms(state, params).total()
}

/// `max_x |ρ(x) − ρ(−x)|` for a grid symmetric about the origin.
pub fn mirror_asymmetry(field: &ComplexField) -> Result<f64> {
    let grid = field.grid();
    if grid.boundary() != Boundary::HardWall || (grid.x_min() + grid.x_max()).abs() > 1e-12 * grid.length() {
        return Err(Error::Shape(
            "mirror check needs a hard-wall grid symmetric about x = 0".into(),
        ));
    }
    let rho = field.density();
    let n = rho.len();
    Ok((0..n).map(|i| (rho[i] - rho[n - 1 - i]).abs()).fold(0.0, f64::max))
}

/// Speed of sound at the trap centre, `c = √(g n(0))` with `n(0) = μ/g`.
pub fn sound_speed(mu: f64) -> f64 {
    mu.max(0.0).sqrt()
}
