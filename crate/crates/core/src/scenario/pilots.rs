use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::{rng, Error, Result, SystemConfig};

/// Where a pilot column came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotOrigin {
    /// Cyclic shift `shift` of the Zadoff-Chu sequence with root `root`.
    ZadoffChu { root: usize, shift: usize },
    /// Supplied directly (toy scenarios whose `K` exceeds the ZC pool).
    Custom,
}

/// `L_t x K` unit-modulus pilot matrix; column `k` is user `k`'s pilot.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    len: usize,
    users: usize,
    /// Row-major: `entries[l * users + k]`.
    entries: Vec<Complex64>,
    origins: Vec<PilotOrigin>,
}

/// `z_u(n) = exp(-i pi u n (n + 1) / L)`.
pub fn zc_symbol(root: usize, n: usize, len: usize) -> Complex64 {
    // u n (n+1) is reduced modulo 2L so the phase stays small and exact.
    let m = (root as u128 * n as u128 * (n as u128 + 1)) % (2 * len as u128);
    let phase = -PI * m as f64 / len as f64;
    Complex64::new(libm::cos(phase), libm::sin(phase))
}

impl PilotMatrix {
    /// Zadoff-Chu pilots with unit shift spacing: user `k` receives root
    /// `k / L_t + 1` cyclically shifted by `k % L_t`.
    pub fn zadoff_chu(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate_for_zc()?;
        let len = cfg.pilot_len;
        let users = cfg.users;
        let mut entries = alloc::vec![Complex64::new(0.0, 0.0); len * users];
        let mut origins = Vec::with_capacity(users);
        for k in 0..users {
            let root = k / len + 1;
            let shift = k % len;
            for l in 0..len {
                entries[l * users + k] = zc_symbol(root, (l + shift) % len, len);
            }
            origins.push(PilotOrigin::ZadoffChu { root, shift });
        }
        Ok(Self {
            len,
            users,
            entries,
            origins,
        })
    }

    /// Random-phase unit-modulus pilots.
    pub fn random_phase(len: usize, users: usize, seed: u64) -> Self {
        let mut r = rng::seeded(seed);
        let entries = (0..len * users)
            .map(|_| {
                let phase = 2.0 * PI * r.random::<f64>();
                Complex64::new(libm::cos(phase), libm::sin(phase))
            })
            .collect();
        Self {
            len,
            users,
            entries,
            origins: alloc::vec![PilotOrigin::Custom; users],
        }
    }

    /// Builds a pilot matrix from row-major entries, checking unit modulus.
    pub fn from_entries(len: usize, users: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != len * users {
            return Err(Error::DimensionMismatch {
                what: "pilot entries",
                expected: len * users,
                found: entries.len(),
            });
        }
        if entries.iter().any(|p| (p.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::InvalidConfig("pilot entries must be unit modulus".into()));
        }
        Ok(Self {
            len,
            users,
            entries,
            origins: alloc::vec![PilotOrigin::Custom; users],
        })
    }

    /// Rebuilds Zadoff-Chu pilots from explicit `(root, shift)` pairs.
    pub fn from_origins(len: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let users = pairs.len();
        let mut entries = alloc::vec![Complex64::new(0.0, 0.0); len * users];
        for (k, &(root, shift)) in pairs.iter().enumerate() {
            if root == 0 || root >= len || shift >= len {
                return Err(Error::InvalidConfig(alloc::format!(
                    "pilot ({root}, {shift}) outside the pool for L_t={len}"
                )));
            }
            for l in 0..len {
                entries[l * users + k] = zc_symbol(root, (l + shift) % len, len);
            }
        }
        Ok(Self {
            len,
            users,
            entries,
            origins: pairs
                .iter()
                .map(|&(root, shift)| PilotOrigin::ZadoffChu { root, shift })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Pilot symbol `l` of user `k`.
    #[inline]
    pub fn get(&self, l: usize, k: usize) -> Complex64 {
        self.entries[l * self.users + k]
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.len).map(|l| self.get(l, k)).collect()
    }

    pub fn origin(&self, k: usize) -> PilotOrigin {
        self.origins[k]
    }

    pub fn origins(&self) -> &[PilotOrigin] {
        &self.origins
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zc_first_symbol_is_one() {
        let z = zc_symbol(1, 0, 11);
        assert_eq!(z, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn zc_second_symbol() {
        let z = zc_symbol(1, 1, 11);
        let want = Complex64::new(libm::cos(2.0 * PI / 11.0), -libm::sin(2.0 * PI / 11.0));
        assert!((z - want).norm() < 1e-15);
    }

    #[test]
    fn pool_of_110_is_distinct() {
        let cfg = SystemConfig::table_iv();
        let p = PilotMatrix::zadoff_chu(&cfg).unwrap();
        assert_eq!(p.users(), 110);
        for a in 0..110 {
            for l in 0..11 {
                assert!((p.get(l, a).norm() - 1.0).abs() < 1e-12);
            }
            for b in a + 1..110 {
                let d: f64 = (0..11).map(|l| (p.get(l, a) - p.get(l, b)).norm()).sum();
                assert!(d > 1e-6, "pilots {a} and {b} coincide");
            }
        }
        assert_eq!(p.origin(0), PilotOrigin::ZadoffChu { root: 1, shift: 0 });
        assert_eq!(p.origin(12), PilotOrigin::ZadoffChu { root: 2, shift: 1 });
    }

    #[test]
    fn capacity_error() {
        let cfg = SystemConfig {
            users: 111,
            subcarriers: 111,
            spreading_degree: 1,
            ..SystemConfig::table_iv()
        };
        assert!(matches!(
            PilotMatrix::zadoff_chu(&cfg),
            Err(Error::PilotCapacity { pool: 110, .. })
        ));
    }

    #[test]
    fn origins_round_trip() {
        let cfg = SystemConfig::table_iv();
        let p = PilotMatrix::zadoff_chu(&cfg).unwrap();
        let pairs: Vec<_> = p
            .origins()
            .iter()
            .map(|o| match o {
                PilotOrigin::ZadoffChu { root, shift } => (*root, *shift),
                PilotOrigin::Custom => unreachable!(),
            })
            .collect();
        assert_eq!(PilotMatrix::from_origins(11, &pairs).unwrap(), p);
    }
}
