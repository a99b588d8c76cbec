//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Two handles are exported: a mean-field run (imprint, then Strang steps)
//! and a small exact run that reports Schmidt weights and natural
//! occupations as fragmentation develops. Errors surface as strings.

use std::sync::Arc;

use dbsoliton::diagnostics::{natural_decomposition, one_body_density, schmidt_decompose, DarkTracker};
use dbsoliton::fock::{
    assemble_hamiltonian, embed_mean_field, propagate_krylov, FockBasis, HamiltonianMatrix, ManyBodyState, ModeBasis,
};
use dbsoliton::grid::{Boundary, Grid};
use dbsoliton::meanfield::{gp_energy, FieldPair, PhysicsParams, SplitStep};
use dbsoliton::soliton::{imprint, ImprintProblem};
use dbsoliton::Species;
use wasm_bindgen::prelude::*;

const OMEGA: f64 = 0.1;
const DT: f64 = 1e-3;

fn err(e: dbsoliton::Error) -> String {
    e.to_string()
}

fn problem(n_dark: f64, n_bright: f64, velocity: f64, x0: f64, pair: bool) -> ImprintProblem {
    if pair {
        ImprintProblem::symmetric_pair(n_dark, n_bright, x0, velocity)
    } else {
        ImprintProblem::single(n_dark, n_bright, -x0.abs(), velocity)
    }
}

/// Imprinted dark-bright soliton(s) evolved with the coupled GP equations.
#[wasm_bindgen]
pub struct MeanFieldDemo {
    grid: Grid,
    params: PhysicsParams,
    stepper: SplitStep,
    fields: FieldPair,
    tracker: DarkTracker,
    mu: f64,
    d: f64,
    eta: f64,
    energy0: f64,
    steps: usize,
}

#[wasm_bindgen]
impl MeanFieldDemo {
    /// Solve the trapped imprint on the 1200-point box `[-60, 60]`.
    #[wasm_bindgen(constructor)]
    pub fn new(n_dark: f64, n_bright: f64, velocity: f64, x0: f64, pair: bool) -> Result<MeanFieldDemo, String> {
        let grid = Grid::new(1200, -60.0, 60.0, Boundary::HardWall).map_err(err)?;
        let params = PhysicsParams::manakov(OMEGA, 1.0);
        let prob = problem(n_dark, n_bright, velocity, x0, pair).with_thomas_fermi_guesses(OMEGA, 1.0);
        let im = imprint(&prob, &grid, &params).map_err(err)?;
        let spec = im.specs[0].clone();
        let tracker = DarkTracker::new(&grid, im.background.density(), spec.x0, 3.0 / spec.d).map_err(err)?;
        let stepper = SplitStep::new(&grid, params, DT).map_err(err)?;
        let energy0 = gp_energy(&im.fields, &params);
        Ok(MeanFieldDemo {
            grid,
            params,
            stepper,
            fields: im.fields,
            tracker,
            mu: im.mu,
            d: spec.d,
            eta: spec.eta,
            energy0,
            steps: 0,
        })
    }

    /// Advance by (approximately) `duration`, in whole steps of 10⁻³.
    pub fn advance(&mut self, duration: f64) -> Result<(), String> {
        let n = (duration / DT).round().max(0.0) as usize;
        self.stepper.advance(&mut self.fields, n, self.steps).map_err(err)?;
        self.steps += n;
        self.tracker.locate(&self.fields.dark.density()).map_err(err)?;
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.fields.time
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn width(&self) -> f64 {
        self.d
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Tracked position of the first dark minimum.
    pub fn dark_minimum(&self) -> f64 {
        self.tracker.last()
    }

    pub fn energy_drift(&self) -> f64 {
        (gp_energy(&self.fields, &self.params) - self.energy0).abs() / self.energy0.abs()
    }

    pub fn x(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    pub fn dark_density(&self) -> Vec<f64> {
        self.fields.dark.density()
    }

    pub fn bright_density(&self) -> Vec<f64> {
        self.fields.bright.density()
    }
}

/// Exact few-body analogue: a small-N imprint embedded in `M` natural modes
/// per species and propagated with Lanczos steps.
#[wasm_bindgen]
pub struct FragmentationDemo {
    modes: ModeBasis,
    hamiltonian: HamiltonianMatrix,
    state: ManyBodyState,
}

#[wasm_bindgen]
impl FragmentationDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n_dark: u32, n_bright: u32, velocity: f64, modes: u32, g_db: f64) -> Result<FragmentationDemo, String> {
        if n_dark > 10 || modes > 6 {
            return Err("demo limited to N_D <= 10 and M <= 6".into());
        }
        let grid = Grid::new(192, -20.0, 20.0, Boundary::HardWall).map_err(err)?;
        let mut params = PhysicsParams::manakov(OMEGA, 1.0);
        let prob = ImprintProblem::single(n_dark as f64, n_bright as f64, -2.5, velocity)
            .with_thomas_fermi_guesses(OMEGA, 1.0);
        let im = imprint(&prob, &grid, &params).map_err(err)?;
        params.g_db = g_db;
        let m = modes as usize;
        let basis = ModeBasis::gp_natural(&im.fields, OMEGA, m, m).map_err(err)?;
        let fock = Arc::new(FockBasis::new(n_dark as usize, m, n_bright as usize, m).map_err(err)?);
        let hamiltonian = assemble_hamiltonian(fock.clone(), &basis, &params).map_err(err)?;
        let state = embed_mean_field(&im.fields, &basis, fock).map_err(err)?;
        Ok(FragmentationDemo {
            modes: basis,
            hamiltonian,
            state,
        })
    }

    pub fn advance(&mut self, duration: f64) -> Result<(), String> {
        self.state = propagate_krylov(&self.state, &self.hamiltonian, duration, 1).map_err(err)?;
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn dimension(&self) -> usize {
        self.state.basis().dim()
    }

    /// Schmidt weights, largest first.
    pub fn schmidt_weights(&self) -> Vec<f64> {
        schmidt_decompose(&self.state).lambdas
    }

    pub fn entropy(&self) -> f64 {
        schmidt_decompose(&self.state).entropy()
    }

    /// Natural occupations of the dark component, largest first.
    pub fn dark_occupations(&self) -> Vec<f64> {
        natural_decomposition(&one_body_density(&self.state, &self.modes, Species::Dark)).occupations
    }

    pub fn bright_occupations(&self) -> Vec<f64> {
        natural_decomposition(&one_body_density(&self.state, &self.modes, Species::Bright)).occupations
    }

    pub fn x(&self) -> Vec<f64> {
        self.modes.grid().nodes()
    }

    pub fn dark_density(&self) -> Vec<f64> {
        one_body_density(&self.state, &self.modes, Species::Dark).density()
    }

    pub fn bright_density(&self) -> Vec<f64> {
        one_body_density(&self.state, &self.modes, Species::Bright).density()
    }
}
