//! `DBSN` binary snapshots.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      4 bytes  "DBSN"
//! version    u32
//! engine     u8       0 = mean field, 1 = exact Fock
//! grid       u64 points, f64 x_min, f64 x_max, u8 boundary (0 hard wall, 1 periodic)
//! time       f64
//! numbers    f64 N_D, f64 N_B
//! basis      u8 kind
//!              0: mean field, then u8 flags (bit 0 mu_D, bit 1 mu_B) and the present f64s
//!              1: exact, then u32 M_D, u32 M_B, u8 provenance, f64 omega
//! arrays     u32 count, then per array u64 length and `length` pairs of f64 (re, im)
//! ```
//!
//! Mean-field snapshots carry two arrays (dark, bright). Exact snapshots
//! carry the Fock coefficients followed by the `M_D` dark and `M_B` bright
//! mode functions, so the state can be analysed without rebuilding modes.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, ManyBodyState, ModeBasis, ModeProvenance};
use crate::grid::{Boundary, ComplexField, Grid};
use crate::meanfield::FieldPair;
use crate::C64;

pub const MAGIC: &[u8; 4] = b"DBSN";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridDescriptor {
    pub points: u64,
    pub x_min: f64,
    pub x_max: f64,
    pub boundary: Boundary,
}

impl GridDescriptor {
    pub fn of(grid: &Grid) -> Self {
        GridDescriptor {
            points: grid.n_points() as u64,
            x_min: grid.x_min(),
            x_max: grid.x_max(),
            boundary: grid.boundary(),
        }
    }

    pub fn build(&self) -> Result<Grid> {
        let n = usize::try_from(self.points).map_err(|_| Error::Format("grid size overflows usize".into()))?;
        Grid::new(n, self.x_min, self.x_max, self.boundary)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasisDescriptor {
    MeanField {
        mu_dark: Option<f64>,
        mu_bright: Option<f64>,
    },
    Exact {
        m_dark: u32,
        m_bright: u32,
        provenance: ModeProvenance,
        omega: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub version: u32,
    pub grid: GridDescriptor,
    pub time: f64,
    pub n_dark: f64,
    pub n_bright: f64,
    pub basis: BasisDescriptor,
    pub arrays: Vec<Vec<C64>>,
}

impl Snapshot {
    pub fn engine_tag(&self) -> &'static str {
        match self.basis {
            BasisDescriptor::MeanField { .. } => "meanfield",
            BasisDescriptor::Exact { .. } => "exact_fock",
        }
    }

    pub fn from_fields(fields: &FieldPair) -> Self {
        Snapshot {
            version: FORMAT_VERSION,
            grid: GridDescriptor::of(fields.grid()),
            time: fields.time,
            n_dark: fields.n_dark(),
            n_bright: fields.n_bright(),
            basis: BasisDescriptor::MeanField {
                mu_dark: fields.mu_dark,
                mu_bright: fields.mu_bright,
            },
            arrays: vec![fields.dark.values().to_vec(), fields.bright.values().to_vec()],
        }
    }

    pub fn from_exact(state: &ManyBodyState, modes: &ModeBasis) -> Self {
        let basis = state.basis();
        let mut arrays = Vec::with_capacity(1 + modes.dark().len() + modes.bright().len());
        arrays.push(state.coeffs().to_vec());
        arrays.extend(modes.dark().modes().iter().map(|f| f.values().to_vec()));
        arrays.extend(modes.bright().modes().iter().map(|f| f.values().to_vec()));
        Snapshot {
            version: FORMAT_VERSION,
            grid: GridDescriptor::of(modes.grid()),
            time: state.time,
            n_dark: basis.dark().n_particles() as f64,
            n_bright: basis.bright().n_particles() as f64,
            basis: BasisDescriptor::Exact {
                m_dark: modes.dark().len() as u32,
                m_bright: modes.bright().len() as u32,
                provenance: modes.provenance(),
                omega: modes.omega(),
            },
            arrays,
        }
    }

    pub fn to_fields(&self) -> Result<FieldPair> {
        let BasisDescriptor::MeanField { mu_dark, mu_bright } = self.basis else {
            return Err(Error::Format(
                "snapshot holds an exact state, not mean-field fields".into(),
            ));
        };
        if self.arrays.len() != 2 {
            return Err(Error::Format(format!(
                "mean-field snapshot has {} arrays, expected 2",
                self.arrays.len()
            )));
        }
        let grid = self.grid.build()?;
        let mut pair = FieldPair::new(
            ComplexField::new(grid.clone(), self.arrays[0].clone())?,
            ComplexField::new(grid, self.arrays[1].clone())?,
            self.time,
        )?;
        pair.mu_dark = mu_dark;
        pair.mu_bright = mu_bright;
        Ok(pair)
    }

    pub fn to_exact(&self) -> Result<(ManyBodyState, ModeBasis)> {
        let BasisDescriptor::Exact {
            m_dark,
            m_bright,
            provenance,
            omega,
        } = self.basis
        else {
            return Err(Error::Format(
                "snapshot holds mean-field fields, not an exact state".into(),
            ));
        };
        let (md, mb) = (m_dark as usize, m_bright as usize);
        if self.arrays.len() != 1 + md + mb {
            return Err(Error::Format(format!(
                "exact snapshot has {} arrays, expected {}",
                self.arrays.len(),
                1 + md + mb
            )));
        }
        let count = |n: f64, label: &str| {
            if n >= 0.0 && n.fract() == 0.0 {
                Ok(n as usize)
            } else {
                Err(Error::Format(format!("{label} particle number {n} is not an integer")))
            }
        };
        let grid = self.grid.build()?;
        let field = |a: &Vec<C64>| ComplexField::new(grid.clone(), a.clone());
        let dark = self.arrays[1..1 + md].iter().map(field).collect::<Result<Vec<_>>>()?;
        let bright = self.arrays[1 + md..].iter().map(field).collect::<Result<Vec<_>>>()?;
        let modes = ModeBasis::from_modes(provenance, omega, dark, bright)?;
        let basis = FockBasis::new(count(self.n_dark, "dark")?, md, count(self.n_bright, "bright")?, mb)?;
        let state = ManyBodyState::new(Arc::new(basis), self.arrays[0].clone(), self.time)?;
        Ok((state, modes))
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LE>(self.version)?;
        w.write_u8(match self.basis {
            BasisDescriptor::MeanField { .. } => 0,
            BasisDescriptor::Exact { .. } => 1,
        })?;
        w.write_u64::<LE>(self.grid.points)?;
        w.write_f64::<LE>(self.grid.x_min)?;
        w.write_f64::<LE>(self.grid.x_max)?;
        w.write_u8(match self.grid.boundary {
            Boundary::HardWall => 0,
            Boundary::Periodic => 1,
        })?;
        w.write_f64::<LE>(self.time)?;
        w.write_f64::<LE>(self.n_dark)?;
        w.write_f64::<LE>(self.n_bright)?;
        match self.basis {
            BasisDescriptor::MeanField { mu_dark, mu_bright } => {
                w.write_u8(0)?;
                w.write_u8(mu_dark.is_some() as u8 | (mu_bright.is_some() as u8) << 1)?;
                for mu in [mu_dark, mu_bright].into_iter().flatten() {
                    w.write_f64::<LE>(mu)?;
                }
            }
            BasisDescriptor::Exact {
                m_dark,
                m_bright,
                provenance,
                omega,
            } => {
                w.write_u8(1)?;
                w.write_u32::<LE>(m_dark)?;
                w.write_u32::<LE>(m_bright)?;
                w.write_u8(match provenance {
                    ModeProvenance::Harmonic => 0,
                    ModeProvenance::GpNatural => 1,
                })?;
                w.write_f64::<LE>(omega)?;
            }
        }
        w.write_u32::<LE>(self.arrays.len() as u32)?;
        for a in &self.arrays {
            w.write_u64::<LE>(a.len() as u64)?;
            for z in a {
                w.write_f64::<LE>(z.re)?;
                w.write_f64::<LE>(z.im)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let version = r.read_u32::<LE>()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format version {version}")));
        }
        let engine = r.read_u8()?;
        let points = r.read_u64::<LE>()?;
        let x_min = r.read_f64::<LE>()?;
        let x_max = r.read_f64::<LE>()?;
        let boundary = match r.read_u8()? {
            0 => Boundary::HardWall,
            1 => Boundary::Periodic,
            b => return Err(Error::Format(format!("unknown boundary code {b}"))),
        };
        let time = r.read_f64::<LE>()?;
        let n_dark = r.read_f64::<LE>()?;
        let n_bright = r.read_f64::<LE>()?;
        let kind = r.read_u8()?;
        if kind != engine {
            return Err(Error::Format(format!(
                "engine code {engine} disagrees with basis kind {kind}"
            )));
        }
        let basis = match kind {
            0 => {
                let flags = r.read_u8()?;
                let mu_dark = if flags & 1 != 0 {
                    Some(r.read_f64::<LE>()?)
                } else {
                    None
                };
                let mu_bright = if flags & 2 != 0 {
                    Some(r.read_f64::<LE>()?)
                } else {
                    None
                };
                BasisDescriptor::MeanField { mu_dark, mu_bright }
            }
            1 => {
                let m_dark = r.read_u32::<LE>()?;
                let m_bright = r.read_u32::<LE>()?;
                let provenance = match r.read_u8()? {
                    0 => ModeProvenance::Harmonic,
                    1 => ModeProvenance::GpNatural,
                    p => return Err(Error::Format(format!("unknown mode provenance code {p}"))),
                };
                let omega = r.read_f64::<LE>()?;
                BasisDescriptor::Exact {
                    m_dark,
                    m_bright,
                    provenance,
                    omega,
                }
            }
            k => return Err(Error::Format(format!("unknown engine code {k}"))),
        };
        let count = r.read_u32::<LE>()?;
        let mut arrays = Vec::with_capacity(count.min(1 << 16) as usize);
        for _ in 0..count {
            let len = r.read_u64::<LE>()?;
            let mut a = Vec::with_capacity(len.min(1 << 24) as usize);
            for _ in 0..len {
                let re = r.read_f64::<LE>()?;
                let im = r.read_f64::<LE>()?;
                a.push(C64::new(re, im));
            }
            arrays.push(a);
        }
        Ok(Snapshot {
            version,
            grid: GridDescriptor {
                points,
                x_min,
                x_max,
                boundary,
            },
            time,
            n_dark,
            n_bright,
            basis,
            arrays,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = bytes;
        let snap = Self::read_from(&mut cur)?;
        if !cur.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes", cur.len())));
        }
        Ok(snap)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(a: &[Vec<C64>]) -> Vec<(u64, u64)> {
        a.iter().flatten().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
    }

    #[test]
    fn mean_field_round_trip_is_bit_exact() {
        let grid = Grid::new(64, -8.0, 8.0, Boundary::HardWall).unwrap();
        let dark = ComplexField::from_fn(&grid, |x| C64::new((x * 0.37).sin() / 3.0, x.cos() * 1e-300));
        let bright = ComplexField::from_fn(&grid, |x| C64::new(f64::MIN_POSITIVE * x, -0.1 / (1.0 + x * x)));
        let mut pair = FieldPair::new(dark, bright, 1.0 / 3.0).unwrap();
        pair.mu_dark = Some(6.42);
        let snap = Snapshot::from_fields(&pair);
        let bytes = snap.to_bytes();
        assert_eq!(&bytes[..4], b"DBSN");
        let back = Snapshot::from_bytes(&bytes).unwrap();
        assert_eq!(bits(&back.arrays), bits(&snap.arrays));
        assert_eq!(back, snap);
        let restored = back.to_fields().unwrap();
        assert_eq!(restored.time.to_bits(), pair.time.to_bits());
        assert_eq!(restored.mu_dark, Some(6.42));
        assert_eq!(restored.mu_bright, None);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn exact_round_trip_restores_state_and_modes() {
        let grid = Grid::new(96, -10.0, 10.0, Boundary::HardWall).unwrap();
        let modes = ModeBasis::harmonic(&grid, 0.5, 3, 2).unwrap();
        let basis = Arc::new(FockBasis::new(2, 3, 1, 2).unwrap());
        let coeffs: Vec<C64> = (0..basis.dim())
            .map(|k| C64::new(1.0 + k as f64, 0.5 - k as f64))
            .collect();
        let mut state = ManyBodyState::new(basis, coeffs, 2.5).unwrap();
        state.normalize();
        let snap = Snapshot::from_exact(&state, &modes);
        assert_eq!(snap.engine_tag(), "exact_fock");
        let back = Snapshot::from_bytes(&snap.to_bytes()).unwrap();
        assert_eq!(bits(&back.arrays), bits(&snap.arrays));
        let (s2, m2) = back.to_exact().unwrap();
        assert_eq!(s2.coeffs(), state.coeffs());
        assert_eq!(m2.dark().mode(1).values(), modes.dark().mode(1).values());
        assert_eq!(m2.provenance(), ModeProvenance::Harmonic);
    }

    #[test]
    fn rejects_corruption() {
        let grid = Grid::new(16, -1.0, 1.0, Boundary::Periodic).unwrap();
        let f = ComplexField::zeros(&grid);
        let snap = Snapshot::from_fields(&FieldPair::new(f.clone(), f, 0.0).unwrap());
        let mut bytes = snap.to_bytes();
        assert!(Snapshot::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        bytes.push(0);
        assert!(matches!(Snapshot::from_bytes(&bytes), Err(Error::Format(_))));
        bytes[0] = b'X';
        assert!(Snapshot::from_bytes(&bytes).is_err());
        assert!(snap.to_exact().is_err());
    }
}
