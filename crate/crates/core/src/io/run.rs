//! Run orchestration: relax, tune, imprint, evolve, analyze.
//!
//! A run owns one output directory:
//!
//! ```text
//! manifest.txt      resolved configuration, library version, wall time, status
//! INCOMPLETE        present until the run finishes; names the failing stage
//! solitons.csv      imprinted soliton parameters
//! imprint.csv       fixed-point sweep log
//! observables.csv   time series
//! convergence.txt   norm / energy / parity / mode orthonormality checks
//! analysis.txt      derived quantities (quarter period, decay time, ...)
//! snapshots/        DBSN files at the snapshot stride
//! ```

use std::fmt::{self, Display};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::diagnostics::{
    analytic_cm_variance, cm_moments, cm_moments_mean_field, coherence_g1, fragment_pair, fragment_track,
    natural_decomposition, one_body_density, one_body_density_mean_field, quarter_period, schmidt_decompose,
    DarkTracker, TrackOptions,
};
use crate::error::{Error, Result};
use crate::fock::{
    assemble_hamiltonian, embed_mean_field, parity_expectation, propagate_krylov_with, FockBasis, KrylovOptions,
    ModeBasis,
};
use crate::grid::Grid;
use crate::io::config::{Engine, RunConfig};
use crate::io::csv::{fmt_f64, parse_table, table};
use crate::io::snapshot::Snapshot;
use crate::io::units::UnitSystem;
use crate::meanfield::{gp_energy, mirror_asymmetry, tune_chemical_potential, FieldPair, SplitStep};
use crate::soliton::{imprint, Imprint};
use crate::{Species, C64};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";
/// Second Schmidt weight above which the run reports fragmentation onset.
pub const FRAGMENTATION_ONSET: f64 = 1e-3;

pub const NORM_TOLERANCE_MEAN_FIELD: f64 = 1e-8;
pub const NORM_TOLERANCE_EXACT: f64 = 1e-10;
pub const ENERGY_TOLERANCE: f64 = 1e-6;
pub const PARITY_TOLERANCE: f64 = 1e-6;
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Setup,
    Relax,
    Imprint,
    Evolve,
    Analyze,
}

impl Stage {
    pub fn tag(self) -> &'static str {
        match self {
            Stage::Setup => "setup",
            Stage::Relax => "relax",
            Stage::Imprint => "imprint",
            Stage::Evolve => "evolve",
            Stage::Analyze => "analyze",
        }
    }
}

impl Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        self.source.exit_code()
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// Ordered `key = value` report.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn extend(&mut self, other: &Report) {
        self.entries.extend(other.entries.iter().cloned());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        Report { entries }
    }
}

/// Named columns of floats.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let header: Vec<&str> = self.header.iter().map(String::as_str).collect();
        table(&header, self.rows.iter().cloned())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (header, rows) = parse_table(text)?;
        Ok(Table { header, rows })
    }
}

/// Output directory with the incomplete-run marker.
#[derive(Clone, Debug)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        std::fs::write(root.join(INCOMPLETE_MARKER), "status = running\n")?;
        Ok(RunDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.root.join(name), contents)?;
        Ok(())
    }

    pub fn snapshot_dir(&self) -> Result<PathBuf> {
        let p = self.root.join("snapshots");
        std::fs::create_dir_all(&p)?;
        Ok(p)
    }

    fn fail(&self, err: &StageError) {
        let _ = self.write(
            INCOMPLETE_MARKER,
            &format!("status = failed\nstage = {}\nerror = {}\n", err.stage, err.source),
        );
    }

    fn finish(&self) -> Result<()> {
        match std::fs::remove_file(self.root.join(INCOMPLETE_MARKER)) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e.into()),
            _ => Ok(()),
        }
    }
}

fn manifest(config: &RunConfig, status: &str, wall: f64) -> String {
    let mut s = format!(
        "# dbsoliton {VERSION}\n# status = {status}\n# wall_time_s = {wall:.3}\n# resolved configuration follows\n\n"
    );
    s.push_str(&config.to_text());
    s
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub directory: PathBuf,
    pub imprint: Report,
    pub observables: Table,
    pub convergence: Report,
    pub analysis: Report,
}

fn setup(config: &RunConfig) -> std::result::Result<Grid, StageError> {
    config.validate().at(Stage::Setup)?;
    config.grid.build().at(Stage::Setup)
}

/// Relax the dark background to the target particle number.
pub fn run_relax(config: &RunConfig) -> std::result::Result<(f64, FieldPair, Report), StageError> {
    let grid = setup(config)?;
    let (mu, background) =
        tune_chemical_potential(&config.physics, config.imprint.n_dark, &grid, config.imprint.mu_guess)
            .at(Stage::Relax)?;
    let n = background.norm_sqr();
    let mut report = Report::new();
    report.push_f64("mu", mu);
    report.push_f64("n_dark", n);
    report.push_f64("peak_density", background.density().iter().copied().fold(0.0, f64::max));
    let bright = crate::grid::ComplexField::zeros(&grid);
    let mut pair = FieldPair::new(background, bright, 0.0).at(Stage::Relax)?;
    pair.mu_dark = Some(mu);
    Ok((mu, pair, report))
}

pub fn imprint_report(im: &Imprint) -> Report {
    let mut r = Report::new();
    r.push_f64("mu", im.mu);
    r.push("sweeps", im.sweeps.len());
    for (j, s) in im.specs.iter().enumerate() {
        let k = j + 1;
        r.push_f64(&format!("d_{k}"), s.d);
        r.push_f64(&format!("eta_{k}"), s.eta);
        r.push_f64(&format!("a_{k}"), s.a);
    }
    r.push_f64("n_dark", im.fields.n_dark());
    r.push_f64("n_bright", im.fields.n_bright());
    r.push_f64("threshold", im.threshold);
    r.push("threshold_bound", format!("{:?}", im.threshold_bound));
    for w in &im.warnings {
        r.push("warning", w);
    }
    r
}

pub fn solitons_csv(im: &Imprint) -> String {
    table(
        &["x0", "velocity", "a", "d", "eta", "mu", "mu_bright"],
        im.specs
            .iter()
            .map(|s| vec![s.x0, s.velocity, s.a, s.d, s.eta, s.mu, s.mu_bright]),
    )
}

pub fn run_imprint(config: &RunConfig) -> std::result::Result<(Imprint, Report), StageError> {
    let grid = setup(config)?;
    let im = imprint(&config.imprint, &grid, &config.physics).at(Stage::Imprint)?;
    let report = imprint_report(&im);
    Ok((im, report))
}

/// Full pipeline, writing all artifacts to `config.output.directory`.
pub fn run(config: &RunConfig) -> std::result::Result<RunOutcome, StageError> {
    let start = Instant::now();
    let dir = RunDir::create(&config.output.directory).at(Stage::Setup)?;
    dir.write("manifest.txt", &manifest(config, "running", 0.0))
        .at(Stage::Setup)?;
    let result = run_in(config, &dir);
    let wall = start.elapsed().as_secs_f64();
    match &result {
        Ok(_) => {
            dir.write("manifest.txt", &manifest(config, "complete", wall))
                .at(Stage::Analyze)?;
            dir.finish().at(Stage::Analyze)?;
        }
        Err(e) => {
            let _ = dir.write(
                "manifest.txt",
                &manifest(config, &format!("failed in {}", e.stage), wall),
            );
            dir.fail(e);
        }
    }
    result
}

fn run_in(config: &RunConfig, dir: &RunDir) -> std::result::Result<RunOutcome, StageError> {
    let (im, imprint) = run_imprint(config)?;
    dir.write("imprint.csv", &im.convergence_csv()).at(Stage::Imprint)?;
    dir.write("solitons.csv", &solitons_csv(&im)).at(Stage::Imprint)?;
    let (observables, mut convergence) = match config.engine {
        Engine::MeanField => evolve_mean_field(config, &im, Some(dir)),
        Engine::ExactFock => evolve_exact(config, &im, Some(dir)),
    }
    .at(Stage::Evolve)?;
    dir.write("observables.csv", &observables.to_csv()).at(Stage::Evolve)?;
    let units = UnitSystem::preset(&config.output.units).unwrap_or_else(UnitSystem::identity);
    if units.is_physical() {
        if let Ok(v) = units.one_d_validity(config.imprint.n_dark, config.physics.omega) {
            convergence.push_f64("advisory_1d_validity", v);
        }
    }
    dir.write("convergence.txt", &convergence.to_text()).at(Stage::Evolve)?;
    let widths: Vec<f64> = im.specs.iter().map(|s| s.d).collect();
    let analysis = analyze(config, &widths, &observables).at(Stage::Analyze)?;
    dir.write("analysis.txt", &analysis.to_text()).at(Stage::Analyze)?;
    Ok(RunOutcome {
        directory: dir.path().to_path_buf(),
        imprint,
        observables,
        convergence,
        analysis,
    })
}

struct Schedule {
    /// Time between samples, an integer number of mean-field steps.
    sample_dt: f64,
    substeps: usize,
    samples: usize,
    snapshot_stride: usize,
}

impl Schedule {
    fn new(config: &RunConfig) -> Self {
        let ev = &config.evolution;
        let substeps = ((ev.observe_every / ev.dt).round() as usize).max(1);
        let sample_dt = substeps as f64 * ev.dt;
        Schedule {
            sample_dt,
            substeps,
            samples: (ev.t_final / sample_dt).round() as usize,
            snapshot_stride: ((ev.snapshot_every / sample_dt).round() as usize).max(1),
        }
    }
}

fn snapshot_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("t{k:06}.dbsn"))
}

pub const MEAN_FIELD_COLUMNS: &[&str] = &[
    "t",
    "n_dark",
    "n_bright",
    "energy",
    "dark_min_1",
    "dark_min_2",
    "bright_mean",
    "mirror_asymmetry",
    "cm_variance",
    "cm_variance_ehrenfest",
];

/// Strang propagation with observables at every sample. With `dir`, writes
/// snapshots at the configured stride.
pub fn evolve_mean_field(config: &RunConfig, im: &Imprint, dir: Option<&RunDir>) -> Result<(Table, Report)> {
    let grid = im.fields.grid().clone();
    let sched = Schedule::new(config);
    let stepper = SplitStep::new(&grid, config.physics, config.evolution.dt)?;
    let background = im.background.density();
    let mut trackers = im
        .specs
        .iter()
        .map(|s| DarkTracker::new(&grid, background.clone(), s.x0, 3.0 / s.d))
        .collect::<Result<Vec<_>>>()?;
    let symmetric = config.scenario.is_symmetric();
    let snap_dir = dir.map(RunDir::snapshot_dir).transpose()?;
    let nodes = grid.nodes();

    let mut fields = im.fields.clone();
    let (n0d, n0b) = (fields.n_dark(), fields.n_bright());
    let e0 = gp_energy(&fields, &config.physics);
    let cm0 = config.diagnostics.cm_variance.then(|| cm_moments_mean_field(&fields));
    let mut obs = Table::new(MEAN_FIELD_COLUMNS);
    let mut worst = [0.0f64; 4];
    for k in 0..=sched.samples {
        if k > 0 {
            stepper.advance(&mut fields, sched.substeps, (k - 1) * sched.substeps)?;
        }
        let t = k as f64 * sched.sample_dt;
        let dens = fields.dark.density();
        let mut mins = [f64::NAN; 2];
        for (m, tr) in mins.iter_mut().zip(trackers.iter_mut()) {
            *m = tr.locate(&dens)?;
        }
        let bdens = fields.bright.density();
        let nb = fields.n_bright();
        let bright_mean = if nb > 0.0 {
            grid.integrate(&bdens.iter().zip(&nodes).map(|(d, x)| d * x).collect::<Vec<_>>()) / nb
        } else {
            f64::NAN
        };
        let asym = if symmetric {
            mirror_asymmetry(&fields.dark)?.max(mirror_asymmetry(&fields.bright)?)
        } else {
            f64::NAN
        };
        let (var, var_b4) = match &cm0 {
            Some(c0) => (
                cm_moments_mean_field(&fields).variance(),
                analytic_cm_variance(c0, config.physics.omega, t),
            ),
            None => (f64::NAN, f64::NAN),
        };
        let energy = gp_energy(&fields, &config.physics);
        let nd = fields.n_dark();
        worst[0] = worst[0].max((nd - n0d).abs() / n0d);
        worst[1] = worst[1].max(if n0b > 0.0 { (nb - n0b).abs() / n0b } else { nb });
        worst[2] = worst[2].max((energy - e0).abs() / e0.abs());
        if symmetric {
            worst[3] = worst[3].max(asym);
        }
        obs.rows.push(vec![
            t,
            nd,
            nb,
            energy,
            mins[0],
            mins[1],
            bright_mean,
            asym,
            var,
            var_b4,
        ]);
        if let Some(sd) = &snap_dir {
            if k % sched.snapshot_stride == 0 {
                Snapshot::from_fields(&fields).save(&snapshot_path(sd, k))?;
            }
        }
    }
    if config.diagnostics.coherence {
        if let Some(d) = dir {
            let rho = one_body_density_mean_field(&fields, Species::Dark);
            d.write(
                "coherence_dark.csv",
                &coherence_csv(&coherence_g1(&rho, config.diagnostics.coherence_stride)),
            )?;
        }
    }

    let mut rep = Report::new();
    rep.push("engine", "meanfield");
    // relative to the initial atom numbers, i.e. on unit-normalized orbitals
    rep.push_f64("max_norm_drift_dark", worst[0]);
    rep.push_f64("max_norm_drift_bright", worst[1]);
    rep.push_f64("max_atom_number_drift_dark", worst[0] * n0d);
    rep.push_f64(
        "max_atom_number_drift_bright",
        if n0b > 0.0 { worst[1] * n0b } else { worst[1] },
    );
    rep.push("norm_check", pass(worst[0].max(worst[1]) < NORM_TOLERANCE_MEAN_FIELD));
    rep.push_f64("max_relative_energy_drift", worst[2]);
    rep.push("energy_check", pass(worst[2] < ENERGY_TOLERANCE));
    if symmetric {
        rep.push_f64("max_mirror_asymmetry", worst[3]);
        rep.push("parity_check", pass(worst[3] < PARITY_TOLERANCE));
    }
    Ok((obs, rep))
}

pub const EXACT_COLUMNS: &[&str] = &[
    "t",
    "norm_defect",
    "energy",
    "lambda_1",
    "lambda_2",
    "entropy",
    "n1_dark",
    "n2_dark",
    "n1_bright",
    "n2_bright",
    "parity",
    "x_fragment_1",
    "x_fragment_2",
    "cm_variance",
    "cm_variance_ehrenfest",
];

/// Build the mode basis the configuration asks for around an imprint.
pub fn exact_modes(config: &RunConfig, im: &Imprint) -> Result<ModeBasis> {
    ModeBasis::build(
        config.basis.provenance,
        im.fields.grid(),
        Some(&im.fields),
        config.physics.omega,
        config.basis.m_dark,
        config.basis.m_bright,
    )
}

/// Embed the imprint into the Fock basis and propagate with Lanczos steps of
/// the sample interval.
pub fn evolve_exact(config: &RunConfig, im: &Imprint, dir: Option<&RunDir>) -> Result<(Table, Report)> {
    let nd = config.imprint.n_dark as usize;
    let nb = config.imprint.n_bright as usize;
    let modes = exact_modes(config, im)?;
    let basis = Arc::new(FockBasis::new(nd, config.basis.m_dark, nb, config.basis.m_bright)?);
    let h = assemble_hamiltonian(basis.clone(), &modes, &config.physics)?;
    let mut state = embed_mean_field(&im.fields, &modes, basis)?;
    let opts = KrylovOptions {
        tolerance: config.basis.krylov_tolerance,
        max_dim: config.basis.krylov_dim,
    };
    let sched = Schedule::new(config);
    let snap_dir = dir.map(RunDir::snapshot_dir).transpose()?;
    let diag = &config.diagnostics;
    let energy = |c: &[C64]| {
        let mut y = vec![C64::new(0.0, 0.0); c.len()];
        h.apply(c, &mut y);
        c.iter().zip(&y).map(|(a, b)| a.conj() * b).sum::<C64>().re
    };
    let parity_defined = modes.dark().parities().is_some() && modes.bright().parities().is_some();
    let e0 = energy(state.coeffs());
    let cm0 = diag.cm_variance.then(|| cm_moments(&state, &modes));
    let mut obs = Table::new(EXACT_COLUMNS);
    let (mut worst_norm, mut worst_energy, mut worst_parity) = (0.0f64, 0.0f64, 0.0f64);
    let mut parity0 = None;
    let mut matvecs = 0;
    for k in 0..=sched.samples {
        if k > 0 {
            let (next, stats) = propagate_krylov_with(&state, &h, sched.sample_dt, 1, &opts)?;
            matvecs += stats.matvecs;
            state = next;
        }
        let t = k as f64 * sched.sample_dt;
        let norm_defect = (state.norm().powi(2) - 1.0).abs();
        let e = energy(state.coeffs());
        let mut row = vec![f64::NAN; EXACT_COLUMNS.len()];
        row[0] = t;
        row[1] = norm_defect;
        row[2] = e;
        if diag.schmidt || diag.fragments {
            let sch = schmidt_decompose(&state);
            row[3] = sch.weight(0);
            row[4] = sch.weight(1);
            row[5] = sch.entropy();
            if diag.fragments {
                let (x1, x2) = fragment_pair(&sch, &state, &modes, diag.weight_floor);
                row[11] = x1;
                row[12] = x2;
            }
        }
        if diag.natural {
            let occ = |s| natural_decomposition(&one_body_density(&state, &modes, s)).occupations;
            let (od, ob) = (occ(Species::Dark), occ(Species::Bright));
            row[6] = od.first().copied().unwrap_or(0.0);
            row[7] = od.get(1).copied().unwrap_or(0.0);
            row[8] = ob.first().copied().unwrap_or(0.0);
            row[9] = ob.get(1).copied().unwrap_or(0.0);
        }
        if parity_defined {
            let p = parity_expectation(&state, &modes)?;
            let p0 = *parity0.get_or_insert(p);
            worst_parity = worst_parity.max((p - p0).abs());
            row[10] = p;
        }
        if let Some(c0) = &cm0 {
            row[13] = cm_moments(&state, &modes).variance();
            row[14] = analytic_cm_variance(c0, config.physics.omega, t);
        }
        worst_norm = worst_norm.max(norm_defect);
        worst_energy = worst_energy.max((e - e0).abs() / e0.abs());
        obs.rows.push(row);
        if let Some(sd) = &snap_dir {
            if k % sched.snapshot_stride == 0 {
                Snapshot::from_exact(&state, &modes).save(&snapshot_path(sd, k))?;
            }
        }
    }
    if diag.coherence {
        if let Some(d) = dir {
            let rho = one_body_density(&state, &modes, Species::Dark);
            d.write(
                "coherence_dark.csv",
                &coherence_csv(&coherence_g1(&rho, diag.coherence_stride)),
            )?;
        }
    }

    let spf = modes
        .dark()
        .orthonormality_defect()
        .max(modes.bright().orthonormality_defect());
    let mut rep = Report::new();
    rep.push("engine", "exact_fock");
    rep.push("dimension", state.basis().dim());
    rep.push("matvecs", matvecs);
    rep.push_f64("max_norm_defect", worst_norm);
    rep.push("norm_check", pass(worst_norm < NORM_TOLERANCE_EXACT));
    rep.push_f64("max_relative_energy_drift", worst_energy);
    rep.push("energy_check", pass(worst_energy < ENERGY_TOLERANCE));
    if parity_defined {
        rep.push_f64("max_parity_drift", worst_parity);
        rep.push("parity_check", pass(worst_parity < PARITY_TOLERANCE));
    }
    rep.push_f64("spf_orthonormality_defect", spf);
    rep.push("spf_check", pass(spf < ORTHONORMALITY_TOLERANCE));
    Ok((obs, rep))
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn coherence_csv(map: &crate::diagnostics::CoherenceMap) -> String {
    let n = map.size();
    let abs = map.abs_sqr();
    let mut rows = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            rows.push(vec![map.positions[a], map.positions[b], abs[a * n + b]]);
        }
    }
    table(&["x", "x_prime", "g1_abs_sqr"], rows)
}

/// Derived quantities from an observables table. `widths` are the imprinted
/// inverse widths `d_j`.
pub fn analyze(config: &RunConfig, widths: &[f64], obs: &Table) -> Result<Report> {
    let col = |name: &str| {
        obs.column(name)
            .ok_or_else(|| Error::Analysis(format!("observables lack `{name}`")))
    };
    let t = col("t")?;
    let mut rep = Report::new();
    rep.push("samples", t.len());
    if let (Ok(var), Ok(b4)) = (col("cm_variance"), col("cm_variance_ehrenfest")) {
        let dev = var
            .iter()
            .zip(&b4)
            .filter(|(v, b)| v.is_finite() && b.is_finite() && **b != 0.0)
            .map(|(v, b)| ((v - b) / b).abs())
            .fold(f64::NAN, f64::max);
        if dev.is_finite() {
            rep.push_f64("cm_max_relative_deviation", dev);
        }
    }
    match config.engine {
        Engine::MeanField => {
            let x1 = col("dark_min_1")?;
            match quarter_period(&t, &x1, 0.0) {
                Ok(q) => {
                    rep.push_f64("quarter_period", q.value());
                    rep.push_f64("t_cross", q.t_cross);
                    rep.push_f64("t_turn", q.t_turn);
                    rep.push_f64("x_turn", q.x_turn);
                }
                Err(e) => rep.push("quarter_period", format!("unavailable ({e})")),
            }
            if widths.len() == 2 {
                let x2 = col("dark_min_2")?;
                let min_sep = x1
                    .iter()
                    .zip(&x2)
                    .map(|(a, b)| (a - b).abs())
                    .fold(f64::INFINITY, f64::min);
                rep.push_f64("min_dark_separation", min_sep);
            }
        }
        Engine::ExactFock => {
            let l2 = col("lambda_2")?;
            let onset = t
                .iter()
                .zip(&l2)
                .find(|(_, l)| **l > FRAGMENTATION_ONSET)
                .map(|(t, _)| *t);
            let rising = l2.windows(2).take_while(|w| w[1] > w[0]).count();
            rep.push("fragmentation_onset", onset.is_some());
            if let Some(t_on) = onset {
                rep.push_f64("fragmentation_onset_time", t_on);
            }
            rep.push_f64("lambda_2_final", l2.last().copied().unwrap_or(f64::NAN));
            rep.push("lambda_2_initial_rising_samples", rising);
            if config.diagnostics.fragments {
                let d = widths
                    .first()
                    .copied()
                    .ok_or_else(|| Error::Analysis("no soliton width".into()))?;
                let opts = TrackOptions {
                    threshold: config.diagnostics.decay_threshold,
                    split_fraction: config.diagnostics.split_fraction,
                    fit_delay: config.diagnostics.fit_delay,
                    ..TrackOptions::default()
                };
                let (x1, x2) = (col("x_fragment_1")?, col("x_fragment_2")?);
                let max_sep = x1.iter().zip(&x2).map(|(a, b)| (a - b).abs() * d).fold(0.0, f64::max);
                rep.push_f64("max_fragment_separation_widths", max_sep);
                match fragment_track(&t, &x1, &x2, d, &opts) {
                    Ok(tr) => {
                        let opt = |r: &mut Report, k: &str, v: Option<f64>| match v {
                            Some(v) => r.push_f64(k, v),
                            None => r.push(k, "none"),
                        };
                        opt(&mut rep, "decay_time", tr.decay_time);
                        opt(&mut rep, "split_time", tr.split_time);
                        opt(&mut rep, "v_fast", tr.v_fast);
                        opt(&mut rep, "v_slow", tr.v_slow);
                        opt(&mut rep, "v_init", tr.v_init);
                        opt(&mut rep, "v_aver", tr.v_aver);
                    }
                    Err(e) => rep.push("decay_time", format!("unavailable ({e})")),
                }
            }
        }
    }
    Ok(rep)
}

/// Recompute `analysis.txt` from the files of a finished run.
pub fn analyze_directory(dir: &Path) -> Result<Report> {
    let config = crate::io::config::parse_config(&std::fs::read_to_string(dir.join("manifest.txt"))?)?;
    let solitons = Table::from_csv(&std::fs::read_to_string(dir.join("solitons.csv"))?)?;
    let widths = solitons
        .column("d")
        .ok_or_else(|| Error::Analysis("solitons.csv lacks `d`".into()))?;
    let obs = Table::from_csv(&std::fs::read_to_string(dir.join("observables.csv"))?)?;
    let rep = analyze(&config, &widths, &obs)?;
    std::fs::write(dir.join("analysis.txt"), rep.to_text())?;
    Ok(rep)
}

/// Summary of one snapshot file.
pub fn describe_snapshot(path: &Path) -> Result<Report> {
    let snap = Snapshot::load(path)?;
    let mut rep = Report::new();
    rep.push("engine", snap.engine_tag());
    rep.push("version", snap.version);
    rep.push("grid_points", snap.grid.points);
    rep.push_f64("x_min", snap.grid.x_min);
    rep.push_f64("x_max", snap.grid.x_max);
    rep.push_f64("time", snap.time);
    rep.push_f64("n_dark", snap.n_dark);
    rep.push_f64("n_bright", snap.n_bright);
    match snap.basis {
        crate::io::snapshot::BasisDescriptor::MeanField { .. } => {
            let f = snap.to_fields()?;
            rep.push_f64("norm_dark", f.n_dark());
            rep.push_f64("norm_bright", f.n_bright());
        }
        crate::io::snapshot::BasisDescriptor::Exact { .. } => {
            let (state, modes) = snap.to_exact()?;
            rep.push("dimension", state.basis().dim());
            let sch = schmidt_decompose(&state);
            rep.push_f64("lambda_1", sch.weight(0));
            rep.push_f64("lambda_2", sch.weight(1));
            for s in [Species::Dark, Species::Bright] {
                let occ = natural_decomposition(&one_body_density(&state, &modes, s)).occupations;
                let list: Vec<String> = occ.iter().map(|v| fmt_f64(*v)).collect();
                rep.push(&format!("occupations_{}", s.tag()), list.join(" "));
            }
        }
    }
    Ok(rep)
}

/// Threads for sweeps: `DBSOLITON_THREADS`, else the available parallelism.
pub fn sweep_threads() -> usize {
    std::env::var("DBSOLITON_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

pub struct SweepPoint {
    pub value: String,
    pub directory: PathBuf,
    pub outcome: std::result::Result<RunOutcome, StageError>,
}

/// One run per value of `key`, each in its own subdirectory of the base
/// output directory. Writes `sweep.txt` summarising the
/// analysis of each point.
pub fn sweep(base: &RunConfig, key: &str, values: &[String], threads: usize) -> Result<Vec<SweepPoint>> {
    let root = base.output.directory.clone();
    let mut configs = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let mut c = base.clone();
        c.set(key, v)
            .map_err(|m| Error::Config(format!("sweep key `{key}` = `{v}`: {m}")))?;
        c.output.directory = root.join(format!("point_{i:03}"));
        c.validate()?;
        configs.push((v.clone(), c));
    }
    std::fs::create_dir_all(&root)?;
    let threads = threads.max(1).min(configs.len().max(1));
    let mut slots: Vec<Option<SweepPoint>> = (0..configs.len()).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some((value, cfg)) = configs.get(i) else { break };
                let point = SweepPoint {
                    value: value.clone(),
                    directory: cfg.output.directory.clone(),
                    outcome: run(cfg),
                };
                results.lock().expect("sweep result lock")[i] = Some(point);
            });
        }
    });
    let points: Vec<SweepPoint> = slots.into_iter().map(|p| p.expect("every sweep point runs")).collect();
    let mut summary = String::new();
    for p in &points {
        summary.push_str(&format!(
            "[{key} = {}]\ndirectory = {}\n",
            p.value,
            p.directory.display()
        ));
        match &p.outcome {
            Ok(o) => summary.push_str(&o.analysis.to_text()),
            Err(e) => summary.push_str(&format!("error = {e}\n")),
        }
        summary.push('\n');
    }
    std::fs::write(root.join("sweep.txt"), summary)?;
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips() {
        let mut r = Report::new();
        r.push_f64("mu", 6.42);
        r.push("flag", true);
        let back = Report::parse(&r.to_text());
        assert_eq!(back, r);
        assert_eq!(back.get_f64("mu"), Some(6.42));
    }

    #[test]
    fn schedule_rounds_to_whole_steps() {
        let mut c = RunConfig::preset(crate::io::config::Scenario::SingleSoliton);
        c.evolution.t_final = 1.0;
        c.evolution.dt = 1e-3;
        c.evolution.observe_every = 0.25;
        c.evolution.snapshot_every = 0.5;
        let s = Schedule::new(&c);
        assert_eq!((s.substeps, s.samples, s.snapshot_stride), (250, 4, 2));
    }
}
