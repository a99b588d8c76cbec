use dbsoliton::io::config::parse_config;
use dbsoliton::io::run::{analyze_directory, describe_snapshot, run, INCOMPLETE_MARKER};
use dbsoliton::io::snapshot::Snapshot;

fn small_exact(dir: &std::path::Path) -> String {
    format!(
        "[scenario]
preset = custom
engine = exact_fock

[physics]
omega = 0.1

[grid]
points = 256
x_min = -20
x_max = 20

[imprint]
n_dark = 6
n_bright = 2
positions = -2.5
velocities = 0.5
relative_amplitudes = 1
mu_guess = 0.57
d_guess = 0.45

[evolution]
t_final = 3
observe_every = 0.25
snapshot_every = 1

[basis]
m_dark = 4
m_bright = 4
provenance = gp_natural

[output]
directory = {}
",
        dir.display()
    )
}

#[test]
fn exact_run_writes_complete_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = parse_config(&small_exact(&out)).unwrap();
    let outcome = run(&cfg).unwrap();

    assert!(!out.join(INCOMPLETE_MARKER).exists());
    for f in [
        "manifest.txt",
        "solitons.csv",
        "imprint.csv",
        "observables.csv",
        "convergence.txt",
        "analysis.txt",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    assert_eq!(outcome.observables.rows.len(), 13);
    assert_eq!(outcome.convergence.get("norm_check"), Some("pass"));
    assert_eq!(outcome.convergence.get("spf_check"), Some("pass"));
    assert_eq!(outcome.analysis.get("fragmentation_onset"), Some("true"));
    let l2 = outcome.observables.column("lambda_2").unwrap();
    assert!(l2[0] < 1e-10 && l2[4] > l2[1]);

    let snaps: Vec<_> = std::fs::read_dir(out.join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 4);
    let last = out.join("snapshots/t000012.dbsn");
    let snap = Snapshot::load(&last).unwrap();
    assert_eq!(snap.engine_tag(), "exact_fock");
    let desc = describe_snapshot(&last).unwrap();
    assert!((desc.get_f64("time").unwrap() - 3.0).abs() < 1e-12);

    // analysis is reproducible from the files alone
    let again = analyze_directory(&out).unwrap();
    assert_eq!(again, outcome.analysis);
}

#[test]
fn identical_configs_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let mut cfg = parse_config(&small_exact(&out)).unwrap();
        cfg.evolution.t_final = 1.0;
        run(&cfg).unwrap();
        texts.push(std::fs::read(out.join("observables.csv")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn failed_stage_leaves_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let mut cfg = parse_config(&small_exact(&out)).unwrap();
    // more bright atoms than the soliton can hold at this background
    cfg.imprint.n_bright = 500.0;
    let err = run(&cfg).unwrap_err();
    let marker = std::fs::read_to_string(out.join(INCOMPLETE_MARKER)).unwrap();
    assert!(marker.contains("status = failed"), "{marker}");
    assert!(marker.contains(&format!("stage = {}", err.stage)));
}
