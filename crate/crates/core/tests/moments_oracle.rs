mod common;

use std::sync::Arc;

use dbsoliton::diagnostics::{analytic_cm_variance, cm_moments, cm_variance, position_moments};
use dbsoliton::fock::{assemble_hamiltonian, propagate_krylov, FockBasis, ManyBodyState, ModeBasis};
use dbsoliton::grid::{Boundary, Grid};
use dbsoliton::meanfield::PhysicsParams;

#[test]
fn free_harmonic_cm_follows_ehrenfest() {
    let omega = 0.3;
    let grid = Grid::new(256, -25.0, 25.0, Boundary::HardWall).unwrap();
    let modes = ModeBasis::harmonic(&grid, omega, 4, 3).unwrap();
    let basis = Arc::new(FockBasis::new(2, 4, 2, 3).unwrap());
    let params = PhysicsParams::manakov(omega, 0.0);
    let h = assemble_hamiltonian(basis.clone(), &modes, &params).unwrap();
    let mut state = ManyBodyState::new(basis.clone(), common::pseudo_random_state(basis.dim(), 7), 0.0).unwrap();
    let m0 = cm_moments(&state, &modes);
    for _ in 0..10 {
        state = propagate_krylov(&state, &h, 0.7, 1).unwrap();
        let want = analytic_cm_variance(&m0, omega, state.time);
        let got = cm_moments(&state, &modes).variance();
        assert!(
            (got - want).abs() < 1e-9 * want.abs().max(1.0),
            "t={} {got} vs {want}",
            state.time
        );
        assert!((cm_variance(&position_moments(&state, &modes)) - got).abs() < 1e-9);
    }
}
