use crate::error::{Error, Result};
use crate::grid::Grid;

/// Follows the dark-soliton density minimum from frame to frame.
///
/// Each frame is searched within `window` of the previous position, on the
/// ratio to the background density so the trap profile does not bias the
/// minimum. The grid minimum is refined by a three-point parabola.
#[derive(Clone, Debug)]
pub struct DarkTracker {
    grid: Grid,
    background: Vec<f64>,
    window: f64,
    last: f64,
}

impl DarkTracker {
    pub fn new(grid: &Grid, background: Vec<f64>, start: f64, window: f64) -> Result<Self> {
        if background.len() != grid.n_points() {
            return Err(Error::Shape("background density does not match the grid".into()));
        }
        Ok(DarkTracker {
            grid: grid.clone(),
            background,
            window,
            last: start,
        })
    }

    pub fn last(&self) -> f64 {
        self.last
    }

    pub fn locate(&mut self, density: &[f64]) -> Result<f64> {
        let floor = 1e-12 * self.background.iter().copied().fold(0.0, f64::max);
        let ratio = |i: usize| density[i] / self.background[i].max(floor);
        let mut best: Option<(f64, usize)> = None;
        for i in 1..self.grid.n_points() - 1 {
            if (self.grid.x(i) - self.last).abs() > self.window || self.background[i] <= floor {
                continue;
            }
            let r = ratio(i);
            if best.is_none_or(|(b, _)| r < b) {
                best = Some((r, i));
            }
        }
        let (_, i) =
            best.ok_or_else(|| Error::Analysis(format!("no grid points within {} of {}", self.window, self.last)))?;
        let (a, b, c) = (ratio(i - 1), ratio(i), ratio(i + 1));
        let den = a - 2.0 * b + c;
        let shift = if den > 0.0 { 0.5 * (a - c) / den } else { 0.0 };
        self.last = self.grid.x(i) + shift.clamp(-1.0, 1.0) * self.grid.spacing();
        Ok(self.last)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarterPeriod {
    /// First crossing of the trap centre.
    pub t_cross: f64,
    /// First turning point after the crossing.
    pub t_turn: f64,
    pub x_turn: f64,
}

impl QuarterPeriod {
    pub fn value(&self) -> f64 {
        self.t_turn - self.t_cross
    }
}

/// Quarter period of an oscillating track: time from the first crossing of
/// `centre` to the following extremum. Both are refined between samples
/// (linear crossing, parabolic extremum).
pub fn quarter_period(times: &[f64], x: &[f64], centre: f64) -> Result<QuarterPeriod> {
    if times.len() != x.len() || times.len() < 3 {
        return Err(Error::Analysis("track needs at least three samples".into()));
    }
    let k = (1..x.len())
        .find(|&k| (x[k - 1] - centre) * (x[k] - centre) <= 0.0 && x[k] != x[k - 1])
        .ok_or_else(|| Error::Analysis("track never crosses the centre".into()))?;
    let f = (centre - x[k - 1]) / (x[k] - x[k - 1]);
    let t_cross = times[k - 1] + f * (times[k] - times[k - 1]);
    let dir = (x[k] - x[k - 1]).signum();
    let j = (k.max(1)..x.len() - 1)
        .find(|&j| dir * (x[j] - x[j - 1]) >= 0.0 && dir * (x[j + 1] - x[j]) < 0.0)
        .ok_or_else(|| Error::Analysis("no turning point after the centre crossing".into()))?;
    let (a, b, c) = (x[j - 1], x[j], x[j + 1]);
    let den = a - 2.0 * b + c;
    let h = times[j + 1] - times[j];
    let (shift, x_turn) = if den != 0.0 {
        let s = (0.5 * (a - c) / den).clamp(-1.0, 1.0);
        (s, b - 0.25 * (a - c) * s)
    } else {
        (0.0, b)
    };
    Ok(QuarterPeriod {
        t_cross,
        t_turn: times[j] + shift * h,
        x_turn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    #[test]
    fn sinusoid_quarter_period() {
        let w = 0.05;
        let t: Vec<f64> = (0..=800).map(|k| k as f64 * 0.1).collect();
        let x: Vec<f64> = t.iter().map(|s| -2.5 * (w * s).cos()).collect();
        let q = quarter_period(&t, &x, 0.0).unwrap();
        let quarter = std::f64::consts::FRAC_PI_2 / w;
        assert!((q.t_cross - quarter).abs() < 1e-3);
        assert!((q.value() - quarter).abs() < 1e-3);
        assert!((q.x_turn - 2.5).abs() < 1e-6);
    }

    #[test]
    fn tracker_follows_a_moving_dip() {
        let grid = Grid::new(401, -20.0, 20.0, Boundary::HardWall).unwrap();
        let bg: Vec<f64> = grid.nodes().iter().map(|x| 10.0 - 0.01 * x * x).collect();
        let mut tr = DarkTracker::new(&grid, bg.clone(), -3.0, 2.0).unwrap();
        for k in 0..20 {
            let x0 = -3.0 + 0.13 * k as f64;
            let dens: Vec<f64> = grid
                .nodes()
                .iter()
                .zip(&bg)
                .map(|(x, b)| b * (1.0 - 0.9 / ((x - x0) * 1.5).cosh().powi(2)))
                .collect();
            let found = tr.locate(&dens).unwrap();
            assert!((found - x0).abs() < 0.01, "{found} vs {x0}");
        }
    }
}
