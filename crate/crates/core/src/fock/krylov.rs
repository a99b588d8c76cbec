use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::hamiltonian::HamiltonianMatrix;
use super::state::ManyBodyState;
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Local error target per step.
    pub tolerance: f64,
    pub max_dim: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            tolerance: 1e-10,
            max_dim: 30,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KrylovStats {
    pub substeps: usize,
    pub matvecs: usize,
    pub max_subspace: usize,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(−i T τ) e₁` for a real symmetric tridiagonal `T`.
fn tridiagonal_exp(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<C64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    (0..m)
        .map(|r| {
            (0..m)
                .map(|k| q[(r, k)] * q[(0, k)] * C64::from_polar(1.0, -eig.eigenvalues[k] * tau))
                .sum()
        })
        .collect()
}

/// Adaptive Lanczos propagation of `v` by `exp(−iHτ)` over `tau`.
pub fn krylov_evolve(
    h: &HamiltonianMatrix,
    v: &[C64],
    tau: f64,
    opts: &KrylovOptions,
) -> Result<(Vec<C64>, KrylovStats)> {
    let n = v.len();
    let mut stats = KrylovStats::default();
    let mut psi = v.to_vec();
    let mut remaining = tau;
    let mut step = tau;
    let max_dim = opts.max_dim.clamp(2, n.max(2));
    while remaining > 0.0 {
        let vnorm = norm(&psi);
        if !vnorm.is_finite() {
            return Err(Error::Propagation("non-finite state entering the Krylov step".into()));
        }
        if vnorm == 0.0 {
            return Ok((psi, stats));
        }
        let mut basis: Vec<Vec<C64>> = vec![psi.iter().map(|x| x / vnorm).collect()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![ZERO; n];
        step = step.min(remaining);
        let mut accepted: Option<Vec<C64>> = None;
        let scale = h_scale(h);
        loop {
            let j = basis.len() - 1;
            h.apply(&basis[j], &mut w);
            stats.matvecs += 1;
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            // full re-orthogonalization, applied twice
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            if !b.is_finite() {
                return Err(Error::Propagation("Lanczos produced a non-finite vector".into()));
            }
            let m = alpha.len();
            let breakdown = b <= 1e-13 * scale.max(1.0) || m == n;
            let y = tridiagonal_exp(&alpha, &beta, step);
            if breakdown {
                // invariant subspace: the projection is exact
                accepted = Some(y);
                break;
            }
            let err = b * y[m - 1].norm();
            if err <= opts.tolerance {
                accepted = Some(y);
                break;
            }
            if m >= max_dim {
                // shrink the step until the estimate on this subspace passes
                let mut s = step;
                for _ in 0..60 {
                    s *= 0.5;
                    let y = tridiagonal_exp(&alpha, &beta, s);
                    if b * y[m - 1].norm() <= opts.tolerance {
                        step = s;
                        accepted = Some(y);
                        break;
                    }
                }
                if accepted.is_none() {
                    return Err(Error::Propagation(format!(
                        "Krylov step failed to meet tolerance {:.1e} even at step {s:.3e}",
                        opts.tolerance
                    )));
                }
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let y = accepted.expect("set in loop");
        let mut next = vec![ZERO; n];
        for (coef, q) in y.iter().zip(&basis) {
            let c = coef * vnorm;
            next.iter_mut().zip(q).for_each(|(x, v)| *x += c * v);
        }
        psi = next;
        stats.substeps += 1;
        stats.max_subspace = stats.max_subspace.max(alpha.len());
        remaining -= step;
        if remaining < 1e-14 * tau.abs() {
            remaining = 0.0;
        }
        // let the next substep try something longer
        step *= 2.0;
    }
    Ok((psi, stats))
}

fn h_scale(h: &HamiltonianMatrix) -> f64 {
    h.csr()
        .map(|c| c.values().iter().map(|v| v.norm()).fold(0.0, f64::max))
        .unwrap_or(1.0)
}

/// `n_steps` steps of `exp(−iH dt)`.
pub fn propagate_krylov(
    state: &ManyBodyState,
    h: &HamiltonianMatrix,
    dt: f64,
    n_steps: usize,
) -> Result<ManyBodyState> {
    propagate_krylov_with(state, h, dt, n_steps, &KrylovOptions::default()).map(|(s, _)| s)
}

pub fn propagate_krylov_with(
    state: &ManyBodyState,
    h: &HamiltonianMatrix,
    dt: f64,
    n_steps: usize,
    opts: &KrylovOptions,
) -> Result<(ManyBodyState, KrylovStats)> {
    if state.basis() != h.basis() {
        return Err(Error::Shape("state and Hamiltonian use different Fock bases".into()));
    }
    let norm0 = state.norm();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::Propagation(format!("state not normalized (norm {norm0})")));
    }
    let mut v = state.coeffs().to_vec();
    let mut total = KrylovStats::default();
    for _ in 0..n_steps {
        let (next, stats) = krylov_evolve(h, &v, dt, opts)?;
        v = next;
        total.substeps += stats.substeps;
        total.matvecs += stats.matvecs;
        total.max_subspace = total.max_subspace.max(stats.max_subspace);
    }
    let mut out = state.with_coeffs(v);
    out.time = state.time + dt * n_steps as f64;
    Ok((out, total))
}
