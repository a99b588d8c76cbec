use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dbsoliton::io::config::{parse_config, RunConfig, Scenario};
use dbsoliton::io::csv::table;
use dbsoliton::io::run::{
    analyze_directory, describe_snapshot, imprint_report, run, run_imprint, run_relax, solitons_csv, sweep,
    sweep_threads, Report, RunDir, StageError,
};
use dbsoliton::io::snapshot::Snapshot;
use dbsoliton::io::units::{Quantity, UnitSystem};
use dbsoliton::Error;

#[derive(Parser)]
#[command(name = "dbsoliton", version, about = "Dark-bright soliton simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relax the dark background to the target particle number.
    Relax(ConfigArgs),
    /// Solve the trapped imprint problem and write the initial state.
    Imprint(ConfigArgs),
    /// Full run: relax, imprint, evolve, analyze.
    Evolve(ConfigArgs),
    /// Re-analyse a run directory, or summarise a snapshot file.
    Analyze { path: PathBuf },
    /// Run once per value of one configuration key.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Key to vary, e.g. imprint.velocities.
        #[arg(long)]
        key: String,
        /// Values separated by `;`.
        #[arg(long)]
        values: String,
    },
    /// Convert a scaled quantity to SI units.
    ConvertUnits {
        value: f64,
        /// time, length, frequency or velocity.
        #[arg(long, default_value = "time")]
        quantity: String,
        #[arg(long, default_value = "paper_Rb87")]
        units: String,
        /// Dark atom number for the 1D-validity advisory.
        #[arg(long)]
        atoms: Option<f64>,
        /// Scaled axial trap frequency used by the advisory.
        #[arg(long, default_value_t = 0.1)]
        omega: f64,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file.
    #[arg(short, long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Start from a scenario preset instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Override a key: --set section.key=value (repeatable, applied in order).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (same as --set output.directory=...).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn fail(e: &dyn std::fmt::Display, code: i32) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code as u8)
}

fn exit_on(e: Error) -> ExitCode {
    let code = e.exit_code();
    fail(&e, code)
}

fn exit_on_stage(e: StageError) -> ExitCode {
    let code = e.exit_code();
    fail(&e, code)
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                parse_config(&text)?
            }
            (None, Some(p)) => {
                let s = Scenario::from_tag(p).ok_or_else(|| Error::Config(format!("unknown preset `{p}`")))?;
                RunConfig::preset(s)
            }
            (None, None) => RunConfig::preset(Scenario::SingleSoliton),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(out) = &self.out {
            cfg.output.directory = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print(report: &Report) {
    print!("{}", report.to_text());
}

fn field_table(fields: &dbsoliton::meanfield::FieldPair) -> String {
    let grid = fields.grid();
    let (d, b) = (fields.dark.density(), fields.bright.density());
    table(
        &["x", "density_dark", "density_bright"],
        (0..grid.n_points()).map(|i| vec![grid.x(i), d[i], b[i]]),
    )
}

fn relax(args: &ConfigArgs) -> Result<(), ExitCode> {
    let cfg = args.resolve().map_err(exit_on)?;
    let (_, pair, report) = run_relax(&cfg).map_err(exit_on_stage)?;
    let dir = RunDir::create(&cfg.output.directory).map_err(exit_on)?;
    let write = || -> Result<(), Error> {
        dir.write("background.csv", &field_table(&pair))?;
        dir.write("relax.txt", &report.to_text())?;
        Snapshot::from_fields(&pair).save(&dir.path().join("background.dbsn"))?;
        std::fs::remove_file(dir.path().join(dbsoliton::io::run::INCOMPLETE_MARKER))?;
        Ok(())
    };
    write().map_err(exit_on)?;
    print(&report);
    Ok(())
}

fn imprint(args: &ConfigArgs) -> Result<(), ExitCode> {
    let cfg = args.resolve().map_err(exit_on)?;
    let (im, _) = run_imprint(&cfg).map_err(exit_on_stage)?;
    let report = imprint_report(&im);
    let dir = RunDir::create(&cfg.output.directory).map_err(exit_on)?;
    let write = || -> Result<(), Error> {
        dir.write("imprint.csv", &im.convergence_csv())?;
        dir.write("solitons.csv", &solitons_csv(&im))?;
        dir.write("fields.csv", &field_table(&im.fields))?;
        dir.write("imprint.txt", &report.to_text())?;
        Snapshot::from_fields(&im.fields).save(&dir.path().join("initial.dbsn"))?;
        std::fs::remove_file(dir.path().join(dbsoliton::io::run::INCOMPLETE_MARKER))?;
        Ok(())
    };
    write().map_err(exit_on)?;
    for w in &im.warnings {
        eprintln!("warning: {w}");
    }
    print(&report);
    Ok(())
}

fn evolve(args: &ConfigArgs) -> Result<(), ExitCode> {
    let cfg = args.resolve().map_err(exit_on)?;
    let outcome = run(&cfg).map_err(exit_on_stage)?;
    let mut report = outcome.imprint.clone();
    report.extend(&outcome.convergence);
    report.extend(&outcome.analysis);
    report.push("directory", outcome.directory.display());
    print(&report);
    Ok(())
}

fn analyze(path: &Path) -> Result<(), ExitCode> {
    let report = if path.is_dir() {
        analyze_directory(path)
    } else {
        describe_snapshot(path)
    };
    print(&report.map_err(exit_on)?);
    Ok(())
}

fn run_sweep(args: &ConfigArgs, key: &str, values: &str) -> Result<(), ExitCode> {
    let cfg = args.resolve().map_err(exit_on)?;
    let values: Vec<String> = values
        .split(';')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if values.is_empty() {
        return Err(fail(&"sweep needs at least one value", 2));
    }
    let points = sweep(&cfg, key, &values, sweep_threads()).map_err(exit_on)?;
    let mut worst = 0;
    for p in &points {
        match &p.outcome {
            Ok(o) => {
                let td = o
                    .analysis
                    .get("decay_time")
                    .or(o.analysis.get("quarter_period"))
                    .unwrap_or("-");
                println!("{key} = {}: ok ({td}) -> {}", p.value, p.directory.display());
            }
            Err(e) => {
                println!("{key} = {}: {e}", p.value);
                worst = worst.max(e.exit_code());
            }
        }
    }
    if worst != 0 {
        return Err(ExitCode::from(worst as u8));
    }
    Ok(())
}

fn convert(value: f64, quantity: &str, units: &str, atoms: Option<f64>, omega: f64) -> Result<(), ExitCode> {
    let q = Quantity::from_tag(quantity).ok_or_else(|| fail(&format!("unknown quantity `{quantity}`"), 2))?;
    let u = UnitSystem::preset(units).ok_or_else(|| fail(&format!("unknown unit preset `{units}`"), 2))?;
    let si = u.convert(value, q);
    if si != 0.0 && (si.abs() < 1e-3 || si.abs() >= 1e6) {
        println!("{si:e} {}", q.si_unit());
    } else {
        println!("{si} {}", q.si_unit());
    }
    if let Some(n) = atoms {
        match u.one_d_validity(n, omega) {
            Ok(v) => eprintln!("advisory: 1D validity N a_perp^4/(a^2 a_z^2) = {v:.4} (want >> 1)"),
            Err(e) => eprintln!("advisory: {e}"),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Relax(a) => relax(a),
        Command::Imprint(a) => imprint(a),
        Command::Evolve(a) => evolve(a),
        Command::Analyze { path } => analyze(path),
        Command::Sweep { config, key, values } => run_sweep(config, key, values),
        Command::ConvertUnits {
            value,
            quantity,
            units,
            atoms,
            omega,
        } => convert(*value, quantity, units, *atoms, *omega),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
