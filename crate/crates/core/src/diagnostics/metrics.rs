use crate::error::{Error, Result};
use crate::grid::Grid;

/// `|ζ(1/2)|`.
pub const ZETA_HALF: f64 = 1.4603545088095868;

/// `Δ = (1/L) ∫_region |ρ_a − ρ_b| / ρ_b dx` with `L` the region length.
///
/// The integrand is linearly interpolated at the region edges; the
/// denominator is floored at `1e-12 · max ρ_b`.
pub fn relative_density_error(grid: &Grid, rho_a: &[f64], rho_b: &[f64], region: (f64, f64)) -> Result<f64> {
    let n = grid.n_points();
    if rho_a.len() != n || rho_b.len() != n {
        return Err(Error::Shape(format!(
            "densities of length {} and {} on a {n}-point grid",
            rho_a.len(),
            rho_b.len()
        )));
    }
    let (lo, hi) = region;
    if !(hi > lo) {
        return Err(Error::Domain(format!("empty region [{lo}, {hi}]")));
    }
    let floor = 1e-12 * rho_b.iter().copied().fold(0.0, f64::max);
    let f: Vec<f64> = rho_a
        .iter()
        .zip(rho_b)
        .map(|(a, b)| (a - b).abs() / b.max(floor).max(f64::MIN_POSITIVE))
        .collect();
    let mut total = 0.0;
    for i in 0..n - 1 {
        let (x0, x1) = (grid.x(i), grid.x(i + 1));
        let (a, b) = (x0.max(lo), x1.min(hi));
        if b <= a {
            continue;
        }
        let at = |x: f64| f[i] + (f[i + 1] - f[i]) * (x - x0) / (x1 - x0);
        total += 0.5 * (at(a) + at(b)) * (b - a);
    }
    Ok(total / (hi - lo))
}

/// `(1 − |ζ(1/2)| r/√2)⁻¹` for `r = a_s/a_⊥`.
pub fn g1d_correction(ratio: f64) -> Result<f64> {
    let s = ZETA_HALF * ratio / std::f64::consts::SQRT_2;
    if !(ratio >= 0.0) || s >= 1.0 {
        return Err(Error::Domain(format!(
            "a_s/a_perp = {ratio} is at or beyond the confinement-induced resonance"
        )));
    }
    Ok(1.0 / (1.0 - s))
}

/// `g₁D = 2 (ħ²/m) a_s / a_⊥² · (1 − |ζ(1/2)| a_s/(√2 a_⊥))⁻¹`.
pub fn g1d_coupling(a_s: f64, a_perp: f64, hbar_sq_over_mass: f64) -> Result<f64> {
    if !(a_perp > 0.0) {
        return Err(Error::Domain("transverse length must be positive".into()));
    }
    Ok(2.0 * hbar_sq_over_mass * a_s / (a_perp * a_perp) * g1d_correction(a_s / a_perp)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Miscibility {
    Miscible,
    Threshold,
    Immiscible,
}

impl Miscibility {
    pub fn tag(self) -> &'static str {
        match self {
            Miscibility::Miscible => "miscible",
            Miscibility::Threshold => "threshold",
            Miscibility::Immiscible => "immiscible",
        }
    }
}

/// Compares `a₁₂` with `√(a₁₁ a₂₂)`; equality within `1e-12` relative is the threshold.
pub fn miscibility(a11: f64, a22: f64, a12: f64) -> Miscibility {
    let bound = (a11 * a22).sqrt();
    let tol = 1e-12 * bound.abs().max(a12.abs());
    if (a12 - bound).abs() <= tol {
        Miscibility::Threshold
    } else if a12 < bound {
        Miscibility::Miscible
    } else {
        Miscibility::Immiscible
    }
}
