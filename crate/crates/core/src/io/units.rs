//! Conversion from scaled (dimensionless) quantities to SI.

use crate::error::{Error, Result};

const HBAR: f64 = 1.054_571_817e-34;
const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;

/// Scale factors of one unit system, plus the trap and species constants
/// used by the 1D-validity advisory.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitSystem {
    pub name: &'static str,
    /// Seconds per unit of scaled time.
    pub time: f64,
    /// Metres per unit of scaled length.
    pub length: f64,
    /// Transverse trap frequency in rad/s, if the system is physical.
    pub omega_perp: Option<f64>,
    pub mass: Option<f64>,
    pub scattering_length: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Time,
    Length,
    Frequency,
    Velocity,
}

impl Quantity {
    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "time" => Some(Quantity::Time),
            "length" => Some(Quantity::Length),
            "frequency" => Some(Quantity::Frequency),
            "velocity" => Some(Quantity::Velocity),
            _ => None,
        }
    }

    pub fn si_unit(self) -> &'static str {
        match self {
            Quantity::Time => "s",
            Quantity::Length => "m",
            Quantity::Frequency => "1/s",
            Quantity::Velocity => "m/s",
        }
    }
}

impl UnitSystem {
    pub fn identity() -> Self {
        UnitSystem {
            name: "identity",
            time: 1.0,
            length: 1.0,
            omega_perp: None,
            mass: None,
            scattering_length: None,
        }
    }

    /// ⁸⁷Rb with `ω_⊥ = 2π × 200 Hz`, `a_s = 100.4 a₀`, and the reference
    /// 4.09 s and 54.7 μm. The pair is consistent with `1/ω_∥` and
    /// `√(ħ/(m ω_∥))` for `ω_∥ ≈ 0.2445 s⁻¹`.
    pub fn paper_rb87() -> Self {
        UnitSystem {
            name: "paper_Rb87",
            time: 4.09,
            length: 54.7e-6,
            omega_perp: Some(2.0 * std::f64::consts::PI * 200.0),
            mass: Some(86.909_180_527 * ATOMIC_MASS),
            scattering_length: Some(100.4 * BOHR_RADIUS),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Self::identity()),
            "paper_Rb87" => Some(Self::paper_rb87()),
            _ => None,
        }
    }

    pub fn is_physical(&self) -> bool {
        self.omega_perp.is_some()
    }

    pub fn convert(&self, value: f64, quantity: Quantity) -> f64 {
        match quantity {
            Quantity::Time => value * self.time,
            Quantity::Length => value * self.length,
            Quantity::Frequency => value / self.time,
            Quantity::Velocity => value * self.length / self.time,
        }
    }

    /// `N α_⊥⁴ / (a² α_z²)` with oscillator lengths `α = √(ħ/(mω))` and the
    /// axial trap `ω_z = Ω/τ` for the scaled trap frequency `Ω` and time unit
    /// `τ`. The 1D mean-field description wants this much larger than one.
    pub fn one_d_validity(&self, n_atoms: f64, omega: f64) -> Result<f64> {
        let (Some(wp), Some(m), Some(a)) = (self.omega_perp, self.mass, self.scattering_length) else {
            return Err(Error::Domain(format!(
                "unit system `{}` carries no trap constants",
                self.name
            )));
        };
        if !(omega > 0.0) {
            return Err(Error::Domain(format!(
                "axial trap frequency must be positive, got {omega}"
            )));
        }
        let wz = omega / self.time;
        let alpha_perp_sq = HBAR / (m * wp);
        let alpha_z_sq = HBAR / (m * wz);
        Ok(n_atoms * alpha_perp_sq * alpha_perp_sq / (a * a * alpha_z_sq))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scales() {
        let u = UnitSystem::paper_rb87();
        assert!((u.convert(10.0, Quantity::Time) - 40.9).abs() < 1e-12);
        assert!((u.convert(1.0, Quantity::Length) - 54.7e-6).abs() < 1e-18);
        let id = UnitSystem::identity();
        assert_eq!(id.convert(3.25, Quantity::Velocity), 3.25);
        assert!(id.one_d_validity(300.0, 0.1).is_err());
    }

    #[test]
    fn validity_scales_linearly_with_atoms() {
        let u = UnitSystem::paper_rb87();
        let a = u.one_d_validity(100.0, 0.1).unwrap();
        let b = u.one_d_validity(300.0, 0.1).unwrap();
        assert!((b / a - 3.0).abs() < 1e-12 && a > 1.0);
        // reference value for 300 atoms: 122
        assert!((b - 122.0).abs() / 122.0 < 0.02, "{b}");
    }
}
