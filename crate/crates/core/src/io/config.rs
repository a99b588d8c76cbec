//! Sectioned `key = value` run configuration.
//!
//! ```text
//! [scenario]
//! preset = single_soliton
//! engine = meanfield
//!
//! [evolution]
//! t_final = 35
//! ```
//!
//! Lines starting with `#` or `;` are comments. The preset is applied first,
//! whatever its position in the file; every other key then overrides it.
//! Unknown sections and keys are rejected with their line number.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, ModeProvenance};
use crate::grid::{Boundary, Grid};
use crate::meanfield::PhysicsParams;
use crate::soliton::ImprintProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    SingleSoliton,
    TwoSolitonFast,
    TwoSolitonSlow,
    Custom,
}

impl Scenario {
    pub fn tag(self) -> &'static str {
        match self {
            Scenario::SingleSoliton => "single_soliton",
            Scenario::TwoSolitonFast => "two_soliton_fast",
            Scenario::TwoSolitonSlow => "two_soliton_slow",
            Scenario::Custom => "custom",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        [
            Scenario::SingleSoliton,
            Scenario::TwoSolitonFast,
            Scenario::TwoSolitonSlow,
            Scenario::Custom,
        ]
        .into_iter()
        .find(|s| s.tag() == tag)
    }

    /// Imprint targets of the preset. `Custom` starts empty.
    pub fn imprint_problem(self) -> ImprintProblem {
        match self {
            Scenario::SingleSoliton => ImprintProblem::single(300.0, 5.0, -2.5, 0.5),
            Scenario::TwoSolitonFast => ImprintProblem::symmetric_pair(300.0, 5.0, 2.5, 0.5),
            Scenario::TwoSolitonSlow => ImprintProblem::symmetric_pair(300.0, 5.0, 2.5, 0.01),
            Scenario::Custom => ImprintProblem {
                n_dark: 0.0,
                n_bright: 0.0,
                positions: vec![],
                velocities: vec![],
                relative_amplitudes: vec![],
                mu_guess: 6.0,
                d_guess: vec![],
            },
        }
    }

    /// Mirror-symmetric initial state (parity is conserved).
    pub fn is_symmetric(self) -> bool {
        matches!(self, Scenario::TwoSolitonFast | Scenario::TwoSolitonSlow)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    MeanField,
    ExactFock,
}

impl Engine {
    pub fn tag(self) -> &'static str {
        match self {
            Engine::MeanField => "meanfield",
            Engine::ExactFock => "exact_fock",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "meanfield" | "mean_field" => Some(Engine::MeanField),
            "exact_fock" => Some(Engine::ExactFock),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub boundary: Boundary,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.points, self.x_min, self.x_max, self.boundary)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionSpec {
    pub t_final: f64,
    /// Split-step time step. The exact engine steps adaptively between samples.
    pub dt: f64,
    pub snapshot_every: f64,
    pub observe_every: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisSpec {
    pub m_dark: usize,
    pub m_bright: usize,
    pub provenance: ModeProvenance,
    /// Largest dark particle number the exact engine accepts.
    pub dark_cap: usize,
    pub krylov_tolerance: f64,
    pub krylov_dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsSpec {
    pub natural: bool,
    pub schmidt: bool,
    pub fragments: bool,
    pub cm_variance: bool,
    pub coherence: bool,
    pub coherence_stride: usize,
    /// Decay threshold in soliton widths.
    pub decay_threshold: f64,
    /// Below this second Schmidt weight the fragments count as one.
    pub weight_floor: f64,
    pub split_fraction: f64,
    pub fit_delay: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub directory: PathBuf,
    /// Reserved; no stage is stochastic.
    pub seed: u64,
    pub units: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub engine: Engine,
    pub physics: PhysicsParams,
    pub grid: GridSpec,
    pub imprint: ImprintProblem,
    pub evolution: EvolutionSpec,
    pub basis: BasisSpec,
    pub diagnostics: DiagnosticsSpec,
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn preset(scenario: Scenario) -> Self {
        RunConfig {
            scenario,
            engine: Engine::MeanField,
            physics: PhysicsParams::default(),
            grid: GridSpec {
                points: 1200,
                x_min: -60.0,
                x_max: 60.0,
                boundary: Boundary::HardWall,
            },
            imprint: scenario.imprint_problem(),
            evolution: EvolutionSpec {
                t_final: 40.0,
                dt: 1e-3,
                snapshot_every: 0.1,
                observe_every: 0.1,
            },
            basis: BasisSpec {
                m_dark: 4,
                m_bright: 4,
                provenance: ModeProvenance::GpNatural,
                dark_cap: 10,
                krylov_tolerance: 1e-10,
                krylov_dim: 30,
            },
            diagnostics: DiagnosticsSpec {
                natural: true,
                schmidt: true,
                fragments: true,
                cm_variance: true,
                coherence: false,
                coherence_stride: 8,
                decay_threshold: 2.5,
                weight_floor: 1e-2,
                split_fraction: 0.1,
                fit_delay: 1.0,
            },
            output: OutputSpec {
                directory: PathBuf::from("out"),
                seed: 0,
                units: "identity".into(),
            },
        }
    }

    /// Set one `section.key` from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key {
            "scenario.preset" => {
                let s = Scenario::from_tag(v).ok_or_else(|| format!("unknown preset `{v}`"))?;
                let keep = (self.engine, self.output.clone());
                *self = RunConfig::preset(s);
                (self.engine, self.output) = keep;
            }
            "scenario.engine" => self.engine = Engine::from_tag(v).ok_or_else(|| format!("unknown engine `{v}`"))?,
            "physics.omega" => self.physics.omega = float(v)?,
            "physics.g_dd" => self.physics.g_dd = float(v)?,
            "physics.g_bb" => self.physics.g_bb = float(v)?,
            "physics.g_db" => self.physics.g_db = float(v)?,
            "grid.points" => self.grid.points = int(v)?,
            "grid.x_min" => self.grid.x_min = float(v)?,
            "grid.x_max" => self.grid.x_max = float(v)?,
            "grid.boundary" => {
                self.grid.boundary = Boundary::from_tag(v).ok_or_else(|| format!("unknown boundary `{v}`"))?
            }
            "imprint.n_dark" => self.imprint.n_dark = float(v)?,
            "imprint.n_bright" => self.imprint.n_bright = float(v)?,
            "imprint.positions" => self.imprint.positions = floats(v)?,
            "imprint.velocities" => self.imprint.velocities = floats(v)?,
            "imprint.relative_amplitudes" => self.imprint.relative_amplitudes = floats(v)?,
            "imprint.mu_guess" => self.imprint.mu_guess = float(v)?,
            "imprint.d_guess" => self.imprint.d_guess = floats(v)?,
            "evolution.t_final" => self.evolution.t_final = float(v)?,
            "evolution.dt" => self.evolution.dt = float(v)?,
            "evolution.snapshot_every" => self.evolution.snapshot_every = float(v)?,
            "evolution.observe_every" => self.evolution.observe_every = float(v)?,
            "basis.m_dark" => self.basis.m_dark = int(v)?,
            "basis.m_bright" => self.basis.m_bright = int(v)?,
            "basis.provenance" => {
                self.basis.provenance =
                    ModeProvenance::from_tag(v).ok_or_else(|| format!("unknown mode provenance `{v}`"))?
            }
            "basis.dark_cap" => self.basis.dark_cap = int(v)?,
            "basis.krylov_tolerance" => self.basis.krylov_tolerance = float(v)?,
            "basis.krylov_dim" => self.basis.krylov_dim = int(v)?,
            "diagnostics.natural" => self.diagnostics.natural = boolean(v)?,
            "diagnostics.schmidt" => self.diagnostics.schmidt = boolean(v)?,
            "diagnostics.fragments" => self.diagnostics.fragments = boolean(v)?,
            "diagnostics.cm_variance" => self.diagnostics.cm_variance = boolean(v)?,
            "diagnostics.coherence" => self.diagnostics.coherence = boolean(v)?,
            "diagnostics.coherence_stride" => self.diagnostics.coherence_stride = int(v)?,
            "diagnostics.decay_threshold" => self.diagnostics.decay_threshold = float(v)?,
            "diagnostics.weight_floor" => self.diagnostics.weight_floor = float(v)?,
            "diagnostics.split_fraction" => self.diagnostics.split_fraction = float(v)?,
            "diagnostics.fit_delay" => self.diagnostics.fit_delay = float(v)?,
            "output.directory" => self.output.directory = PathBuf::from(v),
            "output.seed" => {
                self.output.seed = v
                    .parse()
                    .map_err(|_| format!("expected an unsigned integer, got `{v}`"))?
            }
            "output.units" => {
                if crate::io::units::UnitSystem::preset(v).is_none() {
                    return Err(format!("unknown unit preset `{v}`"));
                }
                self.output.units = v.to_string()
            }
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Apply a command-line `section.key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form section.key=value")))?;
        self.set(key.trim(), value)
            .map_err(|m| Error::Config(format!("override `{}`: {m}", key.trim())))?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.physics.validate().map_err(as_config)?;
        self.grid.build().map_err(as_config)?;
        self.imprint.validate().map_err(as_config)?;
        let ev = &self.evolution;
        if !(ev.t_final >= 0.0) || !(ev.dt > 0.0) || !(ev.snapshot_every > 0.0) || !(ev.observe_every > 0.0) {
            return Err(Error::Config(
                "evolution times must be positive (t_final may be 0)".into(),
            ));
        }
        let d = &self.diagnostics;
        if !(d.decay_threshold > 0.0) || !(d.split_fraction > 0.0) || !(d.fit_delay >= 0.0) || d.coherence_stride == 0 {
            return Err(Error::Config("diagnostic thresholds must be positive".into()));
        }
        if self.basis.m_dark == 0 || self.basis.m_bright == 0 || self.basis.krylov_dim < 2 {
            return Err(Error::Config(
                "need at least one mode per species and a Krylov dimension of 2".into(),
            ));
        }
        if !(self.basis.krylov_tolerance > 0.0) {
            return Err(Error::Config("Krylov tolerance must be positive".into()));
        }
        if self.engine == Engine::ExactFock {
            let (nd, nb) = (self.imprint.n_dark, self.imprint.n_bright);
            if nd.fract() != 0.0 || nb.fract() != 0.0 {
                return Err(Error::Config("the exact engine needs integer particle numbers".into()));
            }
            let estimate = FockBasis::estimate(nd as usize, self.basis.m_dark, nb as usize, self.basis.m_bright);
            if nd as usize > self.basis.dark_cap {
                return Err(Error::Capacity {
                    dimension: estimate,
                    cap: crate::fock::DIMENSION_CAP,
                    detail: format!(
                        "exact engine limited to N_D <= {}; N_D={nd} with M=({}, {}) would need {estimate} states",
                        self.basis.dark_cap, self.basis.m_dark, self.basis.m_bright
                    ),
                });
            }
        }
        Ok(())
    }

    /// Fully resolved configuration in the input format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join(", ");
        let _ = writeln!(
            s,
            "[scenario]\npreset = {}\nengine = {}\n",
            self.scenario.tag(),
            self.engine.tag()
        );
        let p = &self.physics;
        let _ = writeln!(
            s,
            "[physics]\nomega = {}\ng_dd = {}\ng_bb = {}\ng_db = {}\n",
            fmt(p.omega),
            fmt(p.g_dd),
            fmt(p.g_bb),
            fmt(p.g_db)
        );
        let g = &self.grid;
        let _ = writeln!(
            s,
            "[grid]\npoints = {}\nx_min = {}\nx_max = {}\nboundary = {}\n",
            g.points,
            fmt(g.x_min),
            fmt(g.x_max),
            g.boundary.tag()
        );
        let im = &self.imprint;
        let _ = writeln!(
            s,
            "[imprint]\nn_dark = {}\nn_bright = {}\npositions = {}\nvelocities = {}\nrelative_amplitudes = {}\nmu_guess = {}\nd_guess = {}\n",
            fmt(im.n_dark),
            fmt(im.n_bright),
            list(&im.positions),
            list(&im.velocities),
            list(&im.relative_amplitudes),
            fmt(im.mu_guess),
            list(&im.d_guess)
        );
        let e = &self.evolution;
        let _ = writeln!(
            s,
            "[evolution]\nt_final = {}\ndt = {}\nsnapshot_every = {}\nobserve_every = {}\n",
            fmt(e.t_final),
            fmt(e.dt),
            fmt(e.snapshot_every),
            fmt(e.observe_every)
        );
        let b = &self.basis;
        let _ = writeln!(
            s,
            "[basis]\nm_dark = {}\nm_bright = {}\nprovenance = {}\ndark_cap = {}\nkrylov_tolerance = {}\nkrylov_dim = {}\n",
            b.m_dark,
            b.m_bright,
            b.provenance.tag(),
            b.dark_cap,
            fmt(b.krylov_tolerance),
            b.krylov_dim
        );
        let d = &self.diagnostics;
        let _ = writeln!(
            s,
            "[diagnostics]\nnatural = {}\nschmidt = {}\nfragments = {}\ncm_variance = {}\ncoherence = {}\ncoherence_stride = {}\ndecay_threshold = {}\nweight_floor = {}\nsplit_fraction = {}\nfit_delay = {}\n",
            d.natural,
            d.schmidt,
            d.fragments,
            d.cm_variance,
            d.coherence,
            d.coherence_stride,
            fmt(d.decay_threshold),
            fmt(d.weight_floor),
            fmt(d.split_fraction),
            fmt(d.fit_delay)
        );
        let o = &self.output;
        let _ = write!(
            s,
            "[output]\ndirectory = {}\nseed = {}\nunits = {}\n",
            o.directory.display(),
            o.seed,
            o.units
        );
        s
    }
}

fn fmt(x: f64) -> String {
    // shortest text that parses back to the same value
    format!("{x:?}")
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) | Error::ConfigKey { .. } => e,
        other => Error::Config(other.to_string()),
    }
}

fn float(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got `{v}`"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite number, got `{v}`"))
    }
}

fn floats(v: &str) -> std::result::Result<Vec<f64>, String> {
    if v.is_empty() {
        return Ok(vec![]);
    }
    v.split(',').map(|s| float(s.trim())).collect()
}

fn int(v: &str) -> std::result::Result<usize, String> {
    v.parse()
        .map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn boolean(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

const SECTIONS: [&str; 8] = [
    "scenario",
    "physics",
    "grid",
    "imprint",
    "evolution",
    "basis",
    "diagnostics",
    "output",
];

/// Parse and validate a configuration.
/// Drop a trailing `# ...` comment; the `#` must follow whitespace.
fn strip_inline_comment(line: &str) -> &str {
    let b = line.as_bytes();
    match (1..b.len()).find(|&i| b[i] == b'#' && b[i - 1].is_ascii_whitespace()) {
        Some(i) => &line[..i],
        None => line,
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    let mut section: Option<String> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = strip_inline_comment(raw).trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
            continue;
        }
        if let Some(name) = t.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::ConfigKey {
                    line,
                    key: t.to_string(),
                    message: "unterminated section header".into(),
                })?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(Error::ConfigKey {
                    line,
                    key: name.to_string(),
                    message: "unknown section".into(),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = t.split_once('=').ok_or_else(|| Error::ConfigKey {
            line,
            key: t.to_string(),
            message: "expected `key = value`".into(),
        })?;
        let sec = section.as_ref().ok_or_else(|| Error::ConfigKey {
            line,
            key: key.trim().to_string(),
            message: "key outside any section".into(),
        })?;
        let full = format!("{sec}.{}", key.trim());
        if entries.iter().any(|(_, k, _)| *k == full) {
            return Err(Error::ConfigKey {
                line,
                key: full,
                message: "duplicate key".into(),
            });
        }
        entries.push((line, full, value.trim().to_string()));
    }

    let mut cfg = RunConfig::preset(Scenario::Custom);
    // the preset goes first so explicit keys override it
    entries.sort_by_key(|(_, k, _)| k != "scenario.preset");
    if entries.first().is_none_or(|(_, k, _)| k != "scenario.preset") {
        return Err(Error::Config("missing `preset` in [scenario]".into()));
    }
    for (line, key, value) in &entries {
        cfg.set(key, value).map_err(|message| Error::ConfigKey {
            line: *line,
            key: key.clone(),
            message,
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}
