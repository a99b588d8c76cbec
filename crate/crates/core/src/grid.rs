//! Uniform 1D lattice with quadrature and spectral derivative operators.
//!
//! Two boundary conventions are supported. `HardWall` places nodes on both
//! walls (fields vanish there) and expands the interior in a sine basis, which
//! is the spectral analogue of a sine DVR. `Periodic` uses a plain Fourier
//! basis and is kept for cross-checks against the hard-wall results.
//!
//! Sine transforms are carried out as complex FFTs of the odd extension of
//! the field, so the same code path serves complex data on both boundaries.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    HardWall,
    Periodic,
}

impl Boundary {
    pub fn tag(self) -> &'static str {
        match self {
            Boundary::HardWall => "hard_wall",
            Boundary::Periodic => "periodic",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "hard_wall" | "hard_wall_sine_basis" => Some(Boundary::HardWall),
            "periodic" | "periodic_fourier" => Some(Boundary::Periodic),
            _ => None,
        }
    }
}

struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed wavenumber of every FFT bin.
    wavenumbers: Vec<f64>,
    /// Bins whose derivative multiplier must vanish (Nyquist).
    nyquist: Option<usize>,
}

/// Immutable description of the spatial lattice. Cloning is cheap: the FFT
/// plans are shared.
#[derive(Clone)]
pub struct Grid {
    n_points: usize,
    x_min: f64,
    x_max: f64,
    spacing: f64,
    boundary: Boundary,
    spectral: Arc<Spectral>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n_points", &self.n_points)
            .field("x_min", &self.x_min)
            .field("x_max", &self.x_max)
            .field("spacing", &self.spacing)
            .field("boundary", &self.boundary)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points
            && self.x_min == other.x_min
            && self.x_max == other.x_max
            && self.boundary == other.boundary
    }
}

impl Grid {
    pub fn new(n_points: usize, x_min: f64, x_max: f64, boundary: Boundary) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Config(format!("invalid grid bounds [{x_min}, {x_max}]")));
        }
        let length = x_max - x_min;
        let (spacing, transform_len, base) = match boundary {
            Boundary::HardWall => {
                let h = length / (n_points - 1) as f64;
                // odd extension over twice the box
                (h, 2 * (n_points - 1), std::f64::consts::PI / length)
            }
            Boundary::Periodic => {
                let h = length / n_points as f64;
                (h, n_points, 2.0 * std::f64::consts::PI / length)
            }
        };

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(transform_len);
        let inverse = planner.plan_fft_inverse(transform_len);
        let wavenumbers = (0..transform_len)
            .map(|q| {
                let signed = if q <= transform_len / 2 {
                    q as f64
                } else {
                    q as f64 - transform_len as f64
                };
                signed * base
            })
            .collect();
        let nyquist = (transform_len % 2 == 0).then_some(transform_len / 2);

        Ok(Grid {
            n_points,
            x_min,
            x_max,
            spacing,
            boundary,
            spectral: Arc::new(Spectral {
                forward,
                inverse,
                wavenumbers,
                nyquist,
            }),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Position of node `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Quadrature weights: trapezoidal on hard walls, rectangle rule on
    /// periodic grids.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![self.spacing; self.n_points];
        if self.boundary == Boundary::HardWall {
            w[0] *= 0.5;
            w[self.n_points - 1] *= 0.5;
        }
        w
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let interior: f64 = values.iter().sum();
        match self.boundary {
            Boundary::HardWall => self.spacing * (interior - 0.5 * (values[0] + values[self.n_points - 1])),
            Boundary::Periodic => self.spacing * interior,
        }
    }

    /// Largest eigenvalue of the discrete kinetic operator.
    pub fn max_kinetic_eigenvalue(&self) -> f64 {
        self.spectral
            .wavenumbers
            .iter()
            .fold(0.0_f64, |m, k| m.max(0.5 * k * k))
    }

    /// Signed wavenumbers of the transform bins (length of the transform, not
    /// of the grid).
    pub fn wavenumbers(&self) -> &[f64] {
        &self.spectral.wavenumbers
    }

    /// Apply a diagonal operator in spectral space: `table[q]` multiplies
    /// bin `q`. The table must be even under `q -> -q` on hard-wall grids to
    /// preserve the wall condition.
    pub fn apply_spectral_table(&self, values: &[C64], table: &[C64]) -> Vec<C64> {
        let mut buf = self.load(values);
        self.spectral.forward.process(&mut buf);
        for (b, m) in buf.iter_mut().zip(table) {
            *b *= m;
        }
        self.spectral.inverse.process(&mut buf);
        self.unload(&buf)
    }

    /// Same as [`Grid::apply_spectral_table`], writing the result in place.
    pub fn apply_spectral_table_in_place(&self, values: &mut [C64], table: &[C64]) {
        let out = self.apply_spectral_table(values, table);
        values.copy_from_slice(&out);
    }

    pub fn spectral_table(&self, f: impl Fn(f64) -> C64) -> Vec<C64> {
        self.spectral.wavenumbers.iter().map(|&k| f(k)).collect()
    }

    /// Multiplier table of `exp(-i k^2/2 dt)` for a split-step kinetic update.
    pub fn kinetic_propagator(&self, dt: f64) -> Vec<C64> {
        self.spectral_table(|k| C64::from_polar(1.0, -0.5 * k * k * dt))
    }

    fn load(&self, values: &[C64]) -> Vec<C64> {
        let n = self.n_points;
        match self.boundary {
            Boundary::Periodic => values.to_vec(),
            Boundary::HardWall => {
                let m = 2 * (n - 1);
                let mut buf = vec![C64::new(0.0, 0.0); m];
                for j in 1..n - 1 {
                    buf[j] = values[j];
                    buf[m - j] = -values[j];
                }
                buf
            }
        }
    }

    fn unload(&self, buf: &[C64]) -> Vec<C64> {
        let len = buf.len() as f64;
        buf[..self.n_points].iter().map(|v| v / len).collect()
    }

    fn kinetic_values(&self, values: &[C64]) -> Vec<C64> {
        let table = self.spectral_table(|k| C64::new(0.5 * k * k, 0.0));
        let mut out = self.apply_spectral_table(values, &table);
        if self.boundary == Boundary::HardWall {
            out[0] = C64::new(0.0, 0.0);
            out[self.n_points - 1] = C64::new(0.0, 0.0);
        }
        out
    }

    fn derivative_values(&self, values: &[C64]) -> Vec<C64> {
        let mut table = self.spectral_table(|k| C64::new(0.0, k));
        if let Some(q) = self.spectral.nyquist {
            table[q] = C64::new(0.0, 0.0);
        }
        self.apply_spectral_table(values, &table)
    }
}

/// Complex amplitude sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<C64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Shape(format!(
                "field has {} values, grid has {} points",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        ComplexField {
            values: vec![C64::new(0.0, 0.0); grid.n_points()],
            grid: grid.clone(),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> C64) -> Self {
        ComplexField {
            values: (0..grid.n_points()).map(|i| f(grid.x(i))).collect(),
            grid: grid.clone(),
        }
    }

    pub fn from_real(grid: &Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid.clone(), values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `∫|f|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.integrate(&self.density())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Self {
        ComplexField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| f(self.grid.x(i), v))
                .collect(),
        }
    }

    /// `α·self + β·other` on a shared grid.
    pub fn combine(&self, alpha: C64, other: &ComplexField, beta: C64) -> Result<Self> {
        check_same_grid(self, other)?;
        Ok(ComplexField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }
}

fn check_same_grid(f: &ComplexField, g: &ComplexField) -> Result<()> {
    if f.grid != g.grid {
        return Err(Error::Shape(format!(
            "fields live on different grids: {:?} vs {:?}",
            f.grid, g.grid
        )));
    }
    Ok(())
}

/// `−½ d²/dx²` evaluated spectrally (sine basis on hard walls, Fourier on
/// periodic grids).
pub fn apply_kinetic(field: &ComplexField) -> ComplexField {
    ComplexField {
        values: field.grid.kinetic_values(&field.values),
        grid: field.grid.clone(),
    }
}

/// Spectral first derivative. On hard walls the result is the exact
/// derivative of the sine interpolant, including its wall values.
pub fn derivative(field: &ComplexField) -> ComplexField {
    ComplexField {
        values: field.grid.derivative_values(&field.values),
        grid: field.grid.clone(),
    }
}

/// Quadrature of `conj(f)·g`.
pub fn inner_product(f: &ComplexField, g: &ComplexField) -> Result<C64> {
    check_same_grid(f, g)?;
    let grid = &f.grid;
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in f.values.iter().zip(&g.values) {
        acc += a.conj() * b;
    }
    if grid.boundary == Boundary::HardWall {
        let n = grid.n_points - 1;
        acc -= 0.5 * (f.values[0].conj() * g.values[0] + f.values[n].conj() * g.values[n]);
    }
    Ok(acc * grid.spacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn spacing_conventions() {
        let g = Grid::new(1200, -60.0, 60.0, Boundary::HardWall).unwrap();
        assert!((g.spacing() - 120.0 / 1199.0).abs() < 1e-15);
        let g = Grid::new(8, 0.0, 7.0, Boundary::HardWall).unwrap();
        assert_eq!(g.spacing(), 1.0);
        let g = Grid::new(16, -8.0, 8.0, Boundary::Periodic).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.x(15), 7.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            Grid::new(7, 0.0, 1.0, Boundary::HardWall),
            Err(Error::Config(_))
        ));
        assert!(Grid::new(16, 1.0, 1.0, Boundary::Periodic).is_err());
        assert!(Grid::new(16, 2.0, 1.0, Boundary::HardWall).is_err());
        assert!(Grid::new(16, f64::NAN, 1.0, Boundary::HardWall).is_err());
    }

    #[test]
    fn sine_mode_is_kinetic_eigenfunction() {
        let g = Grid::new(256, 0.0, 10.0, Boundary::HardWall).unwrap();
        for m in [1usize, 3, 17, 100] {
            let k = m as f64 * PI / 10.0;
            let f = ComplexField::from_fn(&g, |x| C64::new((k * x).sin(), 0.0));
            let kf = apply_kinetic(&f);
            let expect: Vec<C64> = f.values().iter().map(|v| v * (0.5 * k * k)).collect();
            let scale = 0.5 * k * k;
            assert!(max_abs_diff(kf.values(), &expect) / scale < 1e-10, "mode {m}");
        }
    }

    #[test]
    fn constant_has_no_kinetic_energy_on_periodic_grid() {
        let g = Grid::new(64, -8.0, 8.0, Boundary::Periodic).unwrap();
        let f = ComplexField::from_fn(&g, |_| C64::new(1.3, -0.2));
        let kf = apply_kinetic(&f);
        assert!(kf.values().iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn gaussian_second_derivative() {
        for boundary in [Boundary::HardWall, Boundary::Periodic] {
            let g = Grid::new(512, -20.0, 20.0, boundary).unwrap();
            let f = ComplexField::from_fn(&g, |x| C64::new((-0.5 * x * x).exp(), 0.0));
            let kf = apply_kinetic(&f);
            let err = (0..g.n_points())
                .map(|i| {
                    let x = g.x(i);
                    (kf.values()[i].re - (0.5 - 0.5 * x * x) * (-0.5 * x * x).exp()).abs()
                })
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "{boundary:?}: {err}");
        }
    }

    #[test]
    fn spectral_derivative_of_gaussian() {
        let g = Grid::new(400, -20.0, 20.0, Boundary::HardWall).unwrap();
        let f = ComplexField::from_fn(&g, |x| C64::new((-0.5 * x * x).exp(), 0.0));
        let df = derivative(&f);
        let err = (0..g.n_points())
            .map(|i| {
                let x = g.x(i);
                (df.values()[i] - C64::new(-x * (-0.5 * x * x).exp(), 0.0)).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn normalized_gaussian_has_unit_norm() {
        let g = Grid::new(1200, -60.0, 60.0, Boundary::HardWall).unwrap();
        let f = ComplexField::from_fn(&g, |x| C64::new(PI.powf(-0.25) * (-0.5 * x * x).exp(), 0.0));
        let n = inner_product(&f, &f).unwrap();
        assert!((n.re - 1.0).abs() < 1e-8 && n.im.abs() < 1e-15);
    }

    #[test]
    fn sine_modes_are_orthogonal() {
        let g = Grid::new(200, 0.0, 5.0, Boundary::HardWall).unwrap();
        let s = |m: f64| ComplexField::from_fn(&g, move |x| C64::new((m * PI * x / 5.0).sin(), 0.0));
        let ip = inner_product(&s(2.0), &s(5.0)).unwrap();
        assert!(ip.norm() < 1e-10);
    }

    #[test]
    fn thomas_fermi_particle_number() {
        // ∫ (μ − Ω²x²/2) over the TF support = (4√2/3) μ^{3/2} / Ω
        let (mu, omega) = (6.42_f64, 0.1_f64);
        let g = Grid::new(6001, -60.0, 60.0, Boundary::HardWall).unwrap();
        let f = ComplexField::from_fn(&g, |x| {
            C64::new((mu - 0.5 * omega * omega * x * x).max(0.0).sqrt(), 0.0)
        });
        let n = inner_product(&f, &f).unwrap().re;
        let exact = 4.0 * 2f64.sqrt() / 3.0 * mu.powf(1.5) / omega;
        assert!((exact - 306.730_015_485_931_86).abs() < 1e-9);
        // kink at the TF edge limits the trapezoid rule to O(h^{3/2})
        assert!((n - exact).abs() / exact < 1e-4, "{n} vs {exact}");
    }

    #[test]
    fn grid_mismatch_is_a_shape_error() {
        let a = Grid::new(16, 0.0, 1.0, Boundary::HardWall).unwrap();
        let b = Grid::new(16, 0.0, 2.0, Boundary::HardWall).unwrap();
        let f = ComplexField::zeros(&a);
        let g = ComplexField::zeros(&b);
        assert!(matches!(inner_product(&f, &g), Err(Error::Shape(_))));
        assert!(ComplexField::new(a, vec![C64::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn trapezoid_exact_for_linear_functions() {
        let g = Grid::new(9, -1.0, 3.0, Boundary::HardWall).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|x| 2.0 * x - 0.5).collect();
        // ∫_{-1}^{3} (2x − 1/2) dx = 8 − 2 = 6
        assert!((g.integrate(&vals) - 6.0).abs() < 1e-14);
    }
}
