use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbsoliton"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &str = "[scenario]
preset = custom
engine = exact_fock

[physics]
omega = 0.1

[grid]
points = 192
x_min = -20
x_max = 20

[imprint]
n_dark = 4
n_bright = 1
positions = -2.5
velocities = 0.5
relative_amplitudes = 1
mu_guess = 0.5
d_guess = 0.4

[evolution]
t_final = 1
observe_every = 0.25
snapshot_every = 0.5

[basis]
m_dark = 3
m_bright = 3
";

fn write_config(dir: &Path) -> String {
    let p = dir.join("small.cfg");
    std::fs::write(&p, SMALL).unwrap();
    p.display().to_string()
}

#[test]
fn convert_units_rb87_preset() {
    let o = cli(&["convert-units", "10", "--units", "paper_Rb87"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "40.9 s");
    let o = cli(&["convert-units", "1", "--quantity", "length"]);
    assert_eq!(stdout(&o).trim(), "5.47e-5 m");
    let o = cli(&["convert-units", "2.5", "--units", "identity", "--quantity", "length"]);
    assert_eq!(stdout(&o).trim(), "2.5 m");
}

#[test]
fn unknown_key_exits_with_config_code() {
    let o = cli(&["imprint", "--set", "grid.spaceing=0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.spaceing"));

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.cfg");
    std::fs::write(&bad, "[scenario]\npreset = single_soliton\n[grid]\npoints = many\n").unwrap();
    let o = cli(&["evolve", "-c", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn oversized_exact_run_exits_with_capacity_code() {
    let o = cli(&[
        "evolve",
        "--preset",
        "single_soliton",
        "--set",
        "scenario.engine=exact_fock",
    ]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("would need"));
}

#[test]
fn evolve_then_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out = tmp.path().join("run");
    let o = cli(&["evolve", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("norm_check = pass"));
    assert!(text.contains("fragmentation_onset = true"));

    let o = cli(&["analyze", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("lambda_2_final"));

    let snap = out.join("snapshots/t000004.dbsn");
    let o = cli(&["analyze", snap.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("engine = exact_fock"));
}

#[test]
fn imprint_and_relax_write_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out = tmp.path().join("imp");
    let o = cli(&["imprint", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "imprint.csv",
        "solitons.csv",
        "fields.csv",
        "imprint.txt",
        "initial.dbsn",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let out = tmp.path().join("rel");
    let o = cli(&["relax", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(out.join("background.csv").exists());
    assert!(stdout(&o).contains("mu = "));
}

#[test]
fn sweep_runs_each_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out = tmp.path().join("sweep");
    let o = cli(&[
        "sweep",
        "-c",
        &cfg,
        "-o",
        out.to_str().unwrap(),
        "--key",
        "imprint.velocities",
        "--values",
        "0.3; 0.6",
        "--set",
        "evolution.t_final=0.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("point_000/analysis.txt").exists());
    assert!(out.join("point_001/analysis.txt").exists());
    assert!(std::fs::read_to_string(out.join("sweep.txt"))
        .unwrap()
        .contains("imprint.velocities = 0.6"));
}
