use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Refuse Fock spaces larger than this many configurations.
pub const DIMENSION_CAP: u128 = 5_000_000;

/// Number of ways to put `n` bosons into `m` modes, `C(n+m−1, n)`.
pub fn species_dimension(n: usize, m: usize) -> u128 {
    if m == 0 {
        return u128::from(n == 0);
    }
    // C(n+m-1, m-1) built incrementally; exact in u128 for any sane size
    let k = (m - 1).min(n) as u128;
    let top = (n + m - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul(top - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Number-state configurations of one species in descending
/// lexicographic order, so `(N, 0, …, 0)` has index 0.
#[derive(Clone, Debug)]
pub struct SpeciesBasis {
    n: usize,
    m: usize,
    /// Flattened occupations, `m` entries per configuration.
    occ: Vec<u16>,
    /// `count[p][q]` = configurations of `p` particles in `q` modes.
    count: Vec<Vec<usize>>,
    hops: OnceLock<HopTables>,
}

impl PartialEq for SpeciesBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m
    }
}

impl Eq for SpeciesBasis {}

/// `a†_i a_k` acting on every configuration: target index and amplitude.
#[derive(Clone, Debug)]
pub struct HopTables {
    m: usize,
    dim: usize,
    target: Vec<u32>,
    amp: Vec<f64>,
}

impl HopTables {
    const NONE: u32 = u32::MAX;

    fn new(basis: &SpeciesBasis) -> Self {
        let (m, dim) = (basis.m, basis.dim());
        let mut target = vec![Self::NONE; m * m * dim];
        let mut amp = vec![0.0; m * m * dim];
        let mut work = vec![0u16; m];
        for c in 0..dim {
            let cfg = basis.config(c);
            for k in 0..m {
                if cfg[k] == 0 {
                    continue;
                }
                for i in 0..m {
                    work.copy_from_slice(cfg);
                    let a = (work[k] as f64).sqrt();
                    work[k] -= 1;
                    let b = (work[i] as f64 + 1.0).sqrt();
                    work[i] += 1;
                    let t = basis.index_of(&work).expect("hop stays in the basis");
                    let slot = (i * m + k) * dim + c;
                    target[slot] = t as u32;
                    amp[slot] = a * b;
                }
            }
        }
        HopTables { m, dim, target, amp }
    }

    /// `a†_i a_k |c⟩ = amp |target⟩`.
    #[inline]
    pub fn get(&self, i: usize, k: usize, c: usize) -> Option<(usize, f64)> {
        let slot = (i * self.m + k) * self.dim + c;
        let t = self.target[slot];
        (t != Self::NONE).then(|| (t as usize, self.amp[slot]))
    }
}

impl SpeciesBasis {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Basis("a species needs at least one mode".into()));
        }
        if n > u16::MAX as usize {
            return Err(Error::Basis(format!("{n} particles exceed the occupation range")));
        }
        let dim = species_dimension(n, m);
        if dim > DIMENSION_CAP {
            return Err(Error::Capacity {
                dimension: dim,
                cap: DIMENSION_CAP,
                detail: format!("{n} particles in {m} modes"),
            });
        }
        let dim = dim as usize;
        let count: Vec<Vec<usize>> = (0..=n)
            .map(|p| (0..=m).map(|q| species_dimension(p, q) as usize).collect())
            .collect();
        let mut occ = Vec::with_capacity(dim * m);
        let mut cur = vec![0u16; m];
        fill(&mut occ, &mut cur, 0, n);
        debug_assert_eq!(occ.len(), dim * m);
        Ok(SpeciesBasis {
            n,
            m,
            occ,
            count,
            hops: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.occ.len() / self.m
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn n_modes(&self) -> usize {
        self.m
    }

    /// Hopping tables, built on first use.
    pub fn hops(&self) -> &HopTables {
        self.hops.get_or_init(|| HopTables::new(self))
    }

    pub fn config(&self, index: usize) -> &[u16] {
        &self.occ[index * self.m..(index + 1) * self.m]
    }

    /// Rank of an occupation tuple, `None` if it is not in this basis.
    pub fn index_of(&self, config: &[u16]) -> Option<usize> {
        if config.len() != self.m || config.iter().map(|&c| c as usize).sum::<usize>() != self.n {
            return None;
        }
        let mut rank = 0;
        let mut rem = self.n;
        for (i, &ni) in config.iter().enumerate().take(self.m - 1) {
            let ni = ni as usize;
            let q = self.m - i - 1;
            // configurations whose mode i holds more than n_i
            for k in ni + 1..=rem {
                rank += self.count[rem - k][q];
            }
            rem -= ni;
        }
        Some(rank)
    }
}

fn fill(out: &mut Vec<u16>, cur: &mut [u16], pos: usize, rem: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = rem as u16;
        out.extend_from_slice(cur);
        return;
    }
    for k in (0..=rem).rev() {
        cur[pos] = k as u16;
        fill(out, cur, pos + 1, rem - k);
    }
    cur[pos] = 0;
}

/// Two-species number-state basis; the global index is `i_D · dim_B + i_B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockBasis {
    dark: SpeciesBasis,
    bright: SpeciesBasis,
}

impl FockBasis {
    pub fn new(n_dark: usize, m_dark: usize, n_bright: usize, m_bright: usize) -> Result<Self> {
        Self::with_cap(n_dark, m_dark, n_bright, m_bright, DIMENSION_CAP)
    }

    pub fn with_cap(n_dark: usize, m_dark: usize, n_bright: usize, m_bright: usize, cap: u128) -> Result<Self> {
        let total = Self::estimate(n_dark, m_dark, n_bright, m_bright);
        if total > cap {
            return Err(Error::Capacity {
                dimension: total,
                cap,
                detail: format!(
                    "N_D={n_dark} in {m_dark} modes ({}) x N_B={n_bright} in {m_bright} modes ({})",
                    species_dimension(n_dark, m_dark),
                    species_dimension(n_bright, m_bright)
                ),
            });
        }
        Ok(FockBasis {
            dark: SpeciesBasis::new(n_dark, m_dark)?,
            bright: SpeciesBasis::new(n_bright, m_bright)?,
        })
    }

    /// Total dimension without building anything (saturates at `u128::MAX`).
    pub fn estimate(n_dark: usize, m_dark: usize, n_bright: usize, m_bright: usize) -> u128 {
        species_dimension(n_dark, m_dark).saturating_mul(species_dimension(n_bright, m_bright))
    }

    pub fn dark(&self) -> &SpeciesBasis {
        &self.dark
    }

    pub fn bright(&self) -> &SpeciesBasis {
        &self.bright
    }

    pub fn species(&self, s: crate::Species) -> &SpeciesBasis {
        match s {
            crate::Species::Dark => &self.dark,
            crate::Species::Bright => &self.bright,
        }
    }

    pub fn dim(&self) -> usize {
        self.dark.dim() * self.bright.dim()
    }

    pub fn index(&self, i_dark: usize, i_bright: usize) -> usize {
        i_dark * self.bright.dim() + i_bright
    }

    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.bright.dim(), index % self.bright.dim())
    }

    pub fn occupations(&self, index: usize) -> (&[u16], &[u16]) {
        let (d, b) = self.split(index);
        (self.dark.config(d), self.bright.config(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_enumeration() {
        let b = SpeciesBasis::new(2, 2).unwrap();
        let all: Vec<_> = (0..b.dim()).map(|i| b.config(i).to_vec()).collect();
        assert_eq!(all, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let b = SpeciesBasis::new(2, 3).unwrap();
        assert_eq!(b.config(0), &[2, 0, 0]);
        assert_eq!(b.config(1), &[1, 1, 0]);
        assert_eq!(b.config(5), &[0, 0, 2]);
    }

    #[test]
    fn dimensions() {
        assert_eq!(species_dimension(300, 1), 1);
        assert_eq!(species_dimension(3, 3), 10);
        assert_eq!(species_dimension(10, 6), 3003);
        assert_eq!(species_dimension(0, 4), 1);
        let f = FockBasis::new(3, 3, 2, 2).unwrap();
        assert_eq!(f.dim(), 10 * 3);
    }

    #[test]
    fn oversized_spaces_are_refused() {
        let err = FockBasis::new(300, 15, 5, 4).unwrap_err();
        assert_eq!(err.exit_code(), 5);
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn hop_amplitudes() {
        let b = SpeciesBasis::new(2, 2).unwrap();
        // a†_1 a_0 |2,0⟩ = √2 |1,1⟩
        assert_eq!(b.hops().get(1, 0, 0), Some((1, 2f64.sqrt())));
        // a†_0 a_0 |1,1⟩ = |1,1⟩
        assert_eq!(b.hops().get(0, 0, 1), Some((1, 1.0)));
        assert_eq!(b.hops().get(0, 1, 0), None);
    }

    proptest! {
        #[test]
        fn rank_inverts_enumeration(n in 0usize..7, m in 1usize..6) {
            let b = SpeciesBasis::new(n, m).unwrap();
            prop_assert_eq!(b.dim() as u128, species_dimension(n, m));
            for i in 0..b.dim() {
                prop_assert_eq!(b.index_of(b.config(i)), Some(i));
                if i > 0 {
                    prop_assert!(b.config(i - 1) > b.config(i));
                }
            }
        }
    }
}
