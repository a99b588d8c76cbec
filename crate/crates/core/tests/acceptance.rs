//! Acceptance battery: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines reach stdout. Criteria
//! listed in `KNOWN_FAIL` are reported but do not fail the target.

mod common;

use std::sync::Arc;
use std::time::Instant;

use common::{pseudo_random_state, FirstQuantized};
use dbsoliton::diagnostics::{
    coherence_g1, decay_time, g1d_correction, natural_decomposition, one_body_density, one_body_density_mean_field,
    relative_density_error, schmidt_decompose,
};
use dbsoliton::fock::{
    assemble_hamiltonian, embed_mean_field, propagate_krylov, FockBasis, ManyBodyState, ModeBasis, ModeProvenance,
};
use dbsoliton::grid::{Boundary, ComplexField, Grid};
use dbsoliton::io::config::{Engine, RunConfig, Scenario};
use dbsoliton::io::run::{analyze, evolve_exact, evolve_mean_field, exact_modes, run_imprint, Table};
use dbsoliton::meanfield::{FieldPair, PhysicsParams};
use dbsoliton::soliton::ImprintProblem;
use dbsoliton::{Species, C64};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

const KNOWN_FAIL: &[usize] = &[2, 8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn mean_field_run(cfg: &RunConfig) -> (Vec<f64>, Table, dbsoliton::io::run::Report) {
    let (im, _) = run_imprint(cfg).expect("imprint");
    let widths = im.specs.iter().map(|s| s.d).collect();
    let (obs, report) = evolve_mean_field(cfg, &im, None).expect("evolve");
    (widths, obs, report)
}

fn exact_config(n_dark: usize, n_bright: usize, velocity: f64, g: f64) -> RunConfig {
    let mut cfg = RunConfig::preset(Scenario::Custom);
    cfg.engine = Engine::ExactFock;
    cfg.physics = PhysicsParams::manakov(0.1, g);
    cfg.imprint =
        ImprintProblem::single(n_dark as f64, n_bright as f64, -2.5, velocity).with_thomas_fermi_guesses(0.1, g);
    cfg.grid.points = 384;
    cfg.grid.x_min = -32.0;
    cfg.grid.x_max = 32.0;
    cfg.evolution.observe_every = 0.5;
    cfg.evolution.snapshot_every = 0.5;
    cfg.diagnostics.natural = true;
    cfg
}

fn criterion_1() -> Outcome {
    let mut cfg = RunConfig::preset(Scenario::SingleSoliton);
    cfg.evolution.t_final = 35.0;
    let (widths, obs, _) = mean_field_run(&cfg);
    let rep = analyze(&cfg, &widths, &obs).expect("analyze");
    let Some(q) = rep.get_f64("quarter_period") else {
        return outcome(false, format!("no quarter period: {:?}", rep.get("quarter_period")));
    };
    let within = (q - 32.5).abs() <= 0.05 * 32.5;
    let reference = (30.0 - q).abs() <= 0.1 * q;
    outcome(
        within && reference,
        format!("T/4 = {q:.3} (target 32.5 +- 5%), analytic 30 within 10% band: {reference}"),
    )
}

fn criterion_2() -> Outcome {
    let cases = [
        (Scenario::SingleSoliton, [6.42, 1.42, 1.88]),
        (Scenario::TwoSolitonFast, [6.47, 1.82, 1.51]),
        (Scenario::TwoSolitonSlow, [6.5, 2.0, 1.58]),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (s, want) in cases {
        let cfg = RunConfig::preset(s);
        let (im, _) = run_imprint(&cfg).expect("imprint");
        let got = [im.mu, im.specs[0].d, im.specs[0].eta];
        let rel: Vec<f64> = got.iter().zip(&want).map(|(g, w)| (g - w).abs() / w).collect();
        let ok = rel.iter().all(|r| *r <= 0.01);
        pass &= ok;
        parts.push(format!(
            "{}: ({:.4}, {:.4}, {:.4}) dev ({:.2}%, {:.2}%, {:.2}%)",
            s.tag(),
            got[0],
            got[1],
            got[2],
            100.0 * rel[0],
            100.0 * rel[1],
            100.0 * rel[2]
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [
        Scenario::SingleSoliton,
        Scenario::TwoSolitonFast,
        Scenario::TwoSolitonSlow,
    ] {
        let mut cfg = RunConfig::preset(s);
        cfg.evolution.t_final = 40.0;
        cfg.evolution.observe_every = 1.0;
        let (_, obs, rep) = mean_field_run(&cfg);
        let t_end = obs.column("t").unwrap().last().copied().unwrap_or(0.0);
        let nd = rep.get_f64("max_norm_drift_dark").unwrap();
        let nb = rep.get_f64("max_norm_drift_bright").unwrap();
        let e = rep.get_f64("max_relative_energy_drift").unwrap();
        let mut ok = nd < 1e-8 && nb < 1e-8 && e < 1e-6 && (t_end - 40.0).abs() < 1e-9;
        let mut line = format!("{}: norm ({nd:.1e}, {nb:.1e}) energy {e:.1e}", s.tag());
        if s.is_symmetric() {
            let p = rep.get_f64("max_mirror_asymmetry").unwrap();
            ok &= p < 1e-6;
            line += &format!(" asymmetry {p:.1e}");
        }
        pass &= ok;
        parts.push(line);
    }
    outcome(pass, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let grid = Grid::new(400, -20.0, 20.0, Boundary::HardWall).unwrap();
    let params = PhysicsParams {
        omega: 0.5,
        g_dd: 1.0,
        g_bb: 0.7,
        g_db: 1.3,
    };
    let mut spectrum: f64 = 0.0;
    let mut density: f64 = 0.0;
    let mut propagation: f64 = 0.0;
    for &(nd, md, nb, mb) in &[(1, 2, 1, 2), (2, 3, 1, 2), (3, 3, 2, 2), (3, 2, 2, 3), (3, 3, 2, 3)] {
        let modes = ModeBasis::harmonic(&grid, 0.5, md, mb).unwrap();
        let basis = Arc::new(FockBasis::new(nd, md, nb, mb).unwrap());
        let h = assemble_hamiltonian(basis.clone(), &modes, &params).unwrap();
        let fq = FirstQuantized::new(&basis, &modes, &params);
        let eig = |m: DMatrix<C64>| {
            let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
            e.sort_by(|a, b| a.partial_cmp(b).unwrap());
            e
        };
        let (a, b) = (eig(h.to_dense()), eig(fq.projected()));
        spectrum = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(spectrum, f64::max);

        let psi = ManyBodyState::new(basis.clone(), pseudo_random_state(basis.dim(), 3), 0.0).unwrap();
        let ours = psi.one_body_matrix(Species::Dark);
        let oracle = fq.dark_density(psi.coeffs());
        for i in 0..md {
            for j in 0..md {
                density = density.max((ours[i][j] - oracle[i][j]).norm());
            }
        }

        let full = SymmetricEigen::new(h.to_dense());
        let x0 = pseudo_random_state(basis.dim(), 11);
        let start = ManyBodyState::new(basis.clone(), x0.clone(), 0.0).unwrap();
        let out = propagate_krylov(&start, &h, 0.25, 20).unwrap();
        let phase = DMatrix::from_diagonal(&DVector::from_iterator(
            basis.dim(),
            full.eigenvalues.iter().map(|e| C64::from_polar(1.0, -e * 5.0)),
        ));
        let q = &full.eigenvectors;
        let exact = q * phase * q.adjoint() * DVector::from_column_slice(&x0);
        let err = out
            .coeffs()
            .iter()
            .zip(exact.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        propagation = propagation.max(err);
    }
    outcome(
        spectrum < 1e-10 && density < 1e-10 && propagation < 1e-8,
        format!("spectra {spectrum:.1e}, <a+a> {density:.1e}, Krylov vs expm at t=5 {propagation:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut cfg = exact_config(3, 1, 0.5, 0.2);
    cfg.basis.provenance = ModeProvenance::Harmonic;
    cfg.basis.m_dark = 20;
    cfg.basis.m_bright = 20;
    cfg.evolution.t_final = 40.0;
    cfg.diagnostics.fragments = false;
    cfg.diagnostics.schmidt = false;
    cfg.diagnostics.natural = false;
    let (im, _) = run_imprint(&cfg).expect("imprint");
    let widths: Vec<f64> = im.specs.iter().map(|s| s.d).collect();
    let (obs, _) = evolve_exact(&cfg, &im, None).expect("exact");
    let exact = analyze(&cfg, &widths, &obs)
        .unwrap()
        .get_f64("cm_max_relative_deviation")
        .unwrap();
    let mut mf = cfg.clone();
    mf.engine = Engine::MeanField;
    let (obs, _) = evolve_mean_field(&mf, &im, None).expect("mean field");
    let mean = analyze(&mf, &widths, &obs)
        .unwrap()
        .get_f64("cm_max_relative_deviation")
        .unwrap();
    outcome(
        exact < 6e-3 && mean > exact,
        format!(
            "N_D=3 N_B=1 g=0.2 M=20, t<=40: exact {:.3}%, mean field {:.3}%",
            100.0 * exact,
            100.0 * mean
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut cfg = exact_config(6, 2, 0.5, 1.0);
    cfg.grid.points = 256;
    cfg.grid.x_min = -20.0;
    cfg.grid.x_max = 20.0;
    cfg.imprint.mu_guess = 0.57;
    cfg.imprint.d_guess = vec![0.45];
    cfg.basis.m_dark = 4;
    cfg.basis.m_bright = 4;
    cfg.evolution.observe_every = 0.25;
    cfg.evolution.t_final = 4.0;
    let (im, _) = run_imprint(&cfg).expect("imprint");
    let modes = exact_modes(&cfg, &im).unwrap();
    let basis = Arc::new(FockBasis::new(6, 4, 2, 4).unwrap());

    // (a) product state
    let state = embed_mean_field(&im.fields, &modes, basis.clone()).unwrap();
    let l1 = schmidt_decompose(&state).weight(0);
    let n1 = natural_decomposition(&one_body_density(&state, &modes, Species::Dark)).occupations[0];
    let a = (l1 - 1.0).abs() < 1e-10 && (n1 - 6.0).abs() < 1e-10;

    // (b) decoupled species stay a product
    let mut free = cfg.clone();
    free.physics.g_db = 0.0;
    let (obs, _) = evolve_exact(&free, &im, None).unwrap();
    let b_dev = obs
        .column("lambda_1")
        .unwrap()
        .iter()
        .map(|l| (l - 1.0).abs())
        .fold(0.0, f64::max);
    let b = b_dev < 1e-10;

    // (c) coupled run fragments from zero
    let (obs, _) = evolve_exact(&cfg, &im, None).unwrap();
    let window = 9;
    let l2 = obs.column("lambda_2").unwrap();
    let n2 = obs.column("n2_dark").unwrap();
    let rising = |v: &[f64]| v[0].abs() < 1e-10 && v[..window].windows(2).all(|w| w[1] > w[0]);
    let c = rising(&l2) && rising(&n2);

    // (d) Schmidt sum of species-function densities
    let h = assemble_hamiltonian(basis.clone(), &modes, &cfg.physics).unwrap();
    let late = propagate_krylov(&state, &h, 0.5, 4).unwrap();
    let sch = schmidt_decompose(&late);
    let mut d_dev: f64 = 0.0;
    for sp in [Species::Dark, Species::Bright] {
        let direct = one_body_density(&late, &modes, sp);
        let mut sum = DMatrix::from_element(4, 4, C64::new(0.0, 0.0));
        for k in 0..sch.lambdas.len() {
            sum += sch.species_function_density(k, sp, &late, &modes).matrix() * C64::new(sch.lambdas[k], 0.0);
        }
        d_dev = d_dev.max((sum - direct.matrix()).iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let d = d_dev < 1e-10;
    outcome(
        a && b && c && d,
        format!(
            "(a) |lambda_1-1| {:.1e}, |n_1-N| {:.1e}; (b) g_DB=0 max |lambda_1-1| {b_dev:.1e}; \
             (c) lambda_2, n_2 rising over t<=2: {c} (lambda_2(2)={:.2e}); (d) reconstruction {d_dev:.1e}",
            (l1 - 1.0).abs(),
            (n1 - 6.0).abs(),
            l2[window - 1]
        ),
    )
}

fn criterion_7() -> Outcome {
    // g1 on a two-orbital density matrix
    let grid = Grid::new(201, -10.0, 10.0, Boundary::HardWall).unwrap();
    let f = |c: f64| {
        let v: Vec<C64> = grid
            .nodes()
            .iter()
            .map(|x| C64::new((-(x - c) * (x - c) / 4.0).exp(), 0.0))
            .collect();
        let fld = ComplexField::new(grid.clone(), v).unwrap();
        let n = fld.norm_sqr().sqrt();
        fld.scaled(C64::new(1.0 / n, 0.0))
    };
    let rho = dbsoliton::diagnostics::ReducedDensityMatrix::new(
        Species::Dark,
        vec![f(-2.0), f(2.0)],
        DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(3.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(0.5, 0.0),
                C64::new(1.0, 0.0),
            ],
        ),
    )
    .unwrap();
    let map = coherence_g1(&rho, 5);
    let mut bound: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for i in 0..map.size() {
        for j in 0..map.size() {
            if let Some(v) = map.get(i, j) {
                bound = bound.max(v.norm_sqr());
                if i == j {
                    diag = diag.max((v - 1.0).norm());
                }
            }
        }
    }
    let g1_ok = bound <= 1.0 + 1e-12 && diag < 1e-12;

    let t: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
    let back: Vec<f64> = t.iter().map(|v| -v).collect();
    let td = decay_time(&t, &t, &back, 1.0, 2.5).unwrap_or(f64::NAN);
    let td_ok = (td - 1.25).abs() < 1e-12;

    let g = Grid::new(401, -20.0, 20.0, Boundary::HardWall).unwrap();
    let a: Vec<f64> = g.nodes().iter().map(|x| (-x * x / 50.0).exp()).collect();
    let scaled: Vec<f64> = a.iter().map(|v| 1.01 * v).collect();
    let d0 = relative_density_error(&g, &a, &a, (-10.0, 10.0)).unwrap();
    let d1 = relative_density_error(&g, &a, &scaled, (-10.0, 10.0)).unwrap();
    let delta_ok = d0 == 0.0 && (d1 - 0.0099).abs() < 1e-4;

    let c = g1d_correction(0.1).unwrap();
    let c_ok = (c - 1.115_153_738_704_048).abs() < 1e-12;

    // mean-field g1 is fully coherent
    let pair = FieldPair::new(f(0.0), ComplexField::zeros(&grid), 0.0).unwrap();
    let mf = coherence_g1(&one_body_density_mean_field(&pair, Species::Dark), 10);
    let coherent = (0..mf.size()).all(|i| mf.get(i, 0).is_none_or(|v| (v.norm() - 1.0).abs() < 1e-10));

    outcome(
        g1_ok && td_ok && delta_ok && c_ok && coherent,
        format!("max|g1|^2 {bound:.6}, diag dev {diag:.1e}, t_D {td}, Delta (0, {d1:.6}), g1D correction {c:.10}"),
    )
}

fn criterion_8() -> Outcome {
    let run = |nd: usize, u: f64| {
        let mut cfg = exact_config(nd, 1, u, 1.0);
        cfg.basis.provenance = ModeProvenance::Harmonic;
        cfg.basis.m_dark = 12;
        cfg.basis.m_bright = 12;
        cfg.evolution.t_final = 60.0;
        cfg.diagnostics.natural = false;
        cfg.diagnostics.weight_floor = 1e-2;
        let (im, _) = run_imprint(&cfg).expect("imprint");
        let widths: Vec<f64> = im.specs.iter().map(|s| s.d).collect();
        let (obs, _) = evolve_exact(&cfg, &im, None).expect("exact");
        let rep = analyze(&cfg, &widths, &obs).unwrap();
        (
            rep.get_f64("decay_time"),
            rep.get_f64("max_fragment_separation_widths").unwrap_or(f64::NAN),
        )
    };
    let fmt = |r: &(Option<f64>, f64)| match r.0 {
        Some(t) => format!("{t:.2}"),
        None => format!("none (max sep {:.2} w)", r.1),
    };
    let by_u: Vec<_> = [0.3, 0.5, 0.7].iter().map(|&u| run(3, u)).collect();
    let by_n: Vec<_> = [2, 3, 4]
        .iter()
        .map(|&n| if n == 3 { by_u[1] } else { run(n, 0.5) })
        .collect();
    let increasing = |v: &[(Option<f64>, f64)]| {
        v.windows(2)
            .all(|w| matches!((w[0].0, w[1].0), (Some(a), Some(b)) if b > a))
    };
    let decreasing = |v: &[(Option<f64>, f64)]| {
        v.windows(2)
            .all(|w| matches!((w[0].0, w[1].0), (Some(a), Some(b)) if b < a))
    };
    let pass = increasing(&by_u) && decreasing(&by_n);
    outcome(
        pass,
        format!(
            "t_D vs u/c (0.3, 0.5, 0.7) at N_D=3: [{}]; vs N_D (2, 3, 4) at u/c=0.5: [{}]",
            by_u.iter().map(fmt).collect::<Vec<_>>().join(", "),
            by_n.iter().map(fmt).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (k, f) in criteria {
        if !filter.is_empty() && !filter.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {k}: {verdict}  {}  [{:.1} s]",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass && !KNOWN_FAIL.contains(&k) {
            unexpected.push(k);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
