use super::schmidt::SchmidtDecomposition;
use crate::error::{Error, Result};
use crate::fock::{ManyBodyState, ModeBasis};
use crate::Species;

/// Mean bright positions `⟨x⟩_k^B = (1/N_B) ∫ x ρ_k^{(1),B}` of the
/// leading `count` species functions.
pub fn fragment_positions(
    schmidt: &SchmidtDecomposition,
    state: &ManyBodyState,
    modes: &ModeBasis,
    count: usize,
) -> Vec<f64> {
    let grid = modes.grid();
    let nodes = grid.nodes();
    (0..count.min(schmidt.lambdas.len()))
        .map(|k| {
            let rho = schmidt.species_function_density(k, Species::Bright, state, modes);
            let dens = rho.density();
            let n = grid.integrate(&dens);
            let weighted: Vec<f64> = dens.iter().zip(&nodes).map(|(d, x)| d * x).collect();
            if n > 0.0 {
                grid.integrate(&weighted) / n
            } else {
                f64::NAN
            }
        })
        .collect()
}

/// Positions of the two leading fragments. While the second Schmidt weight
/// is at or below `weight_floor` its species function is ill defined, so the
/// second position is reported equal to the first.
pub fn fragment_pair(
    schmidt: &SchmidtDecomposition,
    state: &ManyBodyState,
    modes: &ModeBasis,
    weight_floor: f64,
) -> (f64, f64) {
    let pos = fragment_positions(schmidt, state, modes, 2);
    let first = pos[0];
    match pos.get(1) {
        Some(&second) if schmidt.weight(1) > weight_floor && second.is_finite() => (first, second),
        _ => (first, first),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackOptions {
    /// Separation threshold in units of the width `w = 1/d`.
    pub threshold: f64,
    /// Modes count as unsplit while `|Δx| < split_fraction · w`.
    pub split_fraction: f64,
    /// Fits start this long after the split time.
    pub fit_delay: f64,
    pub min_samples: usize,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            threshold: 2.5,
            split_fraction: 0.1,
            fit_delay: 1.0,
            min_samples: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FragmentTrack {
    pub times: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub width: f64,
    /// First time the fragments are more than `threshold · w` apart.
    pub decay_time: Option<f64>,
    /// Last time before the decay with the fragments still on top of each other.
    pub split_time: Option<f64>,
    /// Which series (0 or 1) is the fast fragment.
    pub fast: Option<usize>,
    pub v_fast: Option<f64>,
    pub v_slow: Option<f64>,
    pub v_init: Option<f64>,
    pub v_aver: Option<f64>,
}

/// Least-squares line `y = a + b t`; returns `b`.
pub fn linear_slope(t: &[f64], y: &[f64]) -> Result<f64> {
    if t.len() < 2 || t.len() != y.len() {
        return Err(Error::Analysis(format!(
            "need at least two samples for a fit, got {}",
            t.len()
        )));
    }
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|v| (v - tm) * (v - tm)).sum();
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Analysis("fit window has no time extent".into()));
    }
    Ok(sxy / sxx)
}

/// First time `|x₁ − x₂| > threshold/d`, linearly interpolated between samples.
pub fn decay_time(times: &[f64], first: &[f64], second: &[f64], d: f64, threshold: f64) -> Option<f64> {
    let limit = threshold / d;
    let sep: Vec<f64> = first.iter().zip(second).map(|(a, b)| (a - b).abs()).collect();
    if sep.first().is_some_and(|s| *s > limit) {
        return Some(times[0]);
    }
    for k in 1..sep.len() {
        if sep[k] > limit {
            let (s0, s1) = (sep[k - 1], sep[k]);
            let f = (limit - s0) / (s1 - s0);
            return Some(times[k - 1] + f * (times[k] - times[k - 1]));
        }
    }
    None
}

pub fn fragment_track(
    times: &[f64],
    first: &[f64],
    second: &[f64],
    d: f64,
    opts: &TrackOptions,
) -> Result<FragmentTrack> {
    if times.len() != first.len() || times.len() != second.len() {
        return Err(Error::Shape("fragment series have different lengths".into()));
    }
    if times.len() < opts.min_samples {
        return Err(Error::Analysis(format!(
            "{} samples, need at least {}",
            times.len(),
            opts.min_samples
        )));
    }
    if !(d > 0.0) {
        return Err(Error::Domain("soliton inverse width must be positive".into()));
    }
    let width = 1.0 / d;
    let mut track = FragmentTrack {
        times: times.to_vec(),
        first: first.to_vec(),
        second: second.to_vec(),
        width,
        decay_time: decay_time(times, first, second, d, opts.threshold),
        split_time: None,
        fast: None,
        v_fast: None,
        v_slow: None,
        v_init: None,
        v_aver: None,
    };
    let Some(t_decay) = track.decay_time else {
        return Ok(track);
    };
    let close = opts.split_fraction * width;
    let t0 = times
        .iter()
        .zip(first.iter().zip(second))
        .filter(|(t, _)| **t <= t_decay)
        .filter(|(_, (a, b))| (*a - *b).abs() < close)
        .map(|(t, _)| *t)
        .next_back()
        .unwrap_or(times[0]);
    track.split_time = Some(t0);

    let window: Vec<usize> = (0..times.len()).filter(|&k| times[k] >= t0 + opts.fit_delay).collect();
    if window.len() < opts.min_samples {
        return Err(Error::Analysis(format!(
            "only {} samples after t0 + {} = {}",
            window.len(),
            opts.fit_delay,
            t0 + opts.fit_delay
        )));
    }
    let tw: Vec<f64> = window.iter().map(|&k| times[k]).collect();
    let s1 = linear_slope(&tw, &window.iter().map(|&k| first[k]).collect::<Vec<_>>())?;
    let s2 = linear_slope(&tw, &window.iter().map(|&k| second[k]).collect::<Vec<_>>())?;
    let (fast, vf, vs) = if s1.abs() >= s2.abs() { (0, s1, s2) } else { (1, s2, s1) };
    track.fast = Some(fast);
    track.v_fast = Some(vf);
    track.v_slow = Some(vs);
    track.v_aver = Some(0.5 * (vf + vs));

    let pre: Vec<usize> = (0..times.len()).filter(|&k| times[k] <= t0).collect();
    let pre = if pre.len() >= 2 { pre } else { vec![0, 1] };
    let tp: Vec<f64> = pre.iter().map(|&k| times[k]).collect();
    let avg: Vec<f64> = pre.iter().map(|&k| 0.5 * (first[k] + second[k])).collect();
    track.v_init = Some(linear_slope(&tp, &avg)?);
    Ok(track)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_symmetric_split() {
        let t: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
        let a: Vec<f64> = t.clone();
        let b: Vec<f64> = t.iter().map(|v| -v).collect();
        let td = decay_time(&t, &a, &b, 1.0, 2.5).unwrap();
        assert!((td - 1.25).abs() < 1e-12);
    }

    #[test]
    fn slopes_and_average_velocity() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        // unsplit until t = 2 at speed 0.3, then 0.4 / 0.2
        let a: Vec<f64> = t
            .iter()
            .map(|&s| if s <= 2.0 { 0.3 * s } else { 0.6 + 0.4 * (s - 2.0) })
            .collect();
        let b: Vec<f64> = t
            .iter()
            .map(|&s| if s <= 2.0 { 0.3 * s } else { 0.6 + 0.2 * (s - 2.0) })
            .collect();
        let tr = fragment_track(&t, &a, &b, 2.0, &TrackOptions::default()).unwrap();
        assert!((tr.v_fast.unwrap() - 0.4).abs() < 1e-12);
        assert!((tr.v_slow.unwrap() - 0.2).abs() < 1e-12);
        assert!((tr.v_aver.unwrap() - 0.3).abs() < 1e-12);
        assert!((tr.v_init.unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(tr.fast, Some(0));
        // last sample with |Δx| < 0.1 w = 0.05
        assert!((tr.split_time.unwrap() - 2.2).abs() < 1e-12);
    }

    #[test]
    fn no_decay_leaves_fits_empty() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let z = vec![0.0; 10];
        let tr = fragment_track(&t, &z, &z, 1.0, &TrackOptions::default()).unwrap();
        assert_eq!(tr.decay_time, None);
        assert_eq!(tr.v_fast, None);
    }

    #[test]
    fn short_window_is_an_error() {
        let t = vec![0.0, 0.5, 1.0, 1.5];
        let a = vec![0.0, 1.0, 2.0, 3.0];
        let b = vec![0.0, -1.0, -2.0, -3.0];
        assert!(matches!(
            fragment_track(&t, &a, &b, 1.0, &TrackOptions::default()),
            Err(Error::Analysis(_))
        ));
    }
}
