use alloc::vec::Vec;

use rand::Rng;

use crate::{rng, Error, Result, SystemConfig};

/// Restarts allowed before the regular sampler gives up.
pub const MAX_SAMPLER_ATTEMPTS: usize = 1000;

/// Regular binary LDS spreading matrix (`N x K`, column degree `d_c`,
/// row degree `d_r`), stored as per-user sorted supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadingMatrix {
    subcarriers: usize,
    degree: usize,
    supports: Vec<Vec<usize>>,
}

impl SpreadingMatrix {
    /// Samples a regular matrix by stub matching.
    ///
    /// Users are served in index order; each draws `d_c` row stubs uniformly
    /// from the stubs still free, rejecting stubs of rows it already holds.
    /// A user left without `d_c` distinct free rows restarts the whole
    /// matching.
    pub fn generate(cfg: &SystemConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.subcarriers;
        let dc = cfg.spreading_degree;
        let dr = cfg.row_degree();
        let mut r = rng::seeded(seed);
        'attempt: for _ in 0..MAX_SAMPLER_ATTEMPTS {
            let mut free = alloc::vec![dr; n];
            let mut supports = Vec::with_capacity(cfg.users);
            for _ in 0..cfg.users {
                let mut rows: Vec<usize> = Vec::with_capacity(dc);
                for _ in 0..dc {
                    let total: usize = (0..n)
                        .filter(|row| !rows.contains(row))
                        .map(|row| free[row])
                        .sum();
                    if total == 0 {
                        continue 'attempt;
                    }
                    let mut t = r.random_range(0..total);
                    let row = (0..n)
                        .filter(|row| !rows.contains(row))
                        .find(|&row| {
                            if t < free[row] {
                                true
                            } else {
                                t -= free[row];
                                false
                            }
                        })
                        .expect("stub index within total");
                    free[row] -= 1;
                    rows.push(row);
                }
                rows.sort_unstable();
                supports.push(rows);
            }
            return Ok(Self {
                subcarriers: n,
                degree: dc,
                supports,
            });
        }
        Err(Error::Generation {
            attempts: MAX_SAMPLER_ATTEMPTS,
        })
    }

    /// Builds a matrix from explicit supports, checking regularity.
    pub fn from_supports(subcarriers: usize, mut supports: Vec<Vec<usize>>) -> Result<Self> {
        let users = supports.len();
        let degree = supports.first().map_or(0, Vec::len);
        if users == 0 || degree == 0 {
            return Err(Error::InvalidConfig("empty spreading matrix".into()));
        }
        let mut row_count = alloc::vec![0usize; subcarriers];
        for s in &mut supports {
            s.sort_unstable();
            if s.len() != degree {
                return Err(Error::InvalidConfig("irregular column degree".into()));
            }
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidConfig("repeated sub-carrier in a support".into()));
            }
            for &n in s.iter() {
                if n >= subcarriers {
                    return Err(Error::DimensionMismatch {
                        what: "sub-carrier index",
                        expected: subcarriers,
                        found: n,
                    });
                }
                row_count[n] += 1;
            }
        }
        if row_count.iter().any(|&c| c != row_count[0]) {
            return Err(Error::InvalidConfig("irregular row degree".into()));
        }
        Ok(Self {
            subcarriers,
            degree,
            supports,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn users(&self) -> usize {
        self.supports.len()
    }

    pub fn column_degree(&self) -> usize {
        self.degree
    }

    pub fn row_degree(&self) -> usize {
        self.users() * self.degree / self.subcarriers
    }

    /// Sorted sub-carriers of user `k`.
    pub fn support(&self, k: usize) -> &[usize] {
        &self.supports[k]
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    /// `s_{nk}`.
    pub fn entry(&self, n: usize, k: usize) -> bool {
        self.supports[k].binary_search(&n).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, k: usize, dc: usize) -> SystemConfig {
        SystemConfig {
            users: k,
            subcarriers: n,
            spreading_degree: dc,
            pilot_len: 2,
            ..SystemConfig::table_iv()
        }
    }

    fn degrees(s: &SpreadingMatrix) -> (Vec<usize>, Vec<usize>) {
        let cols = (0..s.users()).map(|k| s.support(k).len()).collect();
        let rows = (0..s.subcarriers())
            .map(|n| (0..s.users()).filter(|&k| s.entry(n, k)).count())
            .collect();
        (cols, rows)
    }

    #[test]
    fn toy_rows_have_degree_four() {
        let s = SpreadingMatrix::generate(&cfg(3, 6, 2), 1).unwrap();
        let (cols, rows) = degrees(&s);
        assert!(cols.iter().all(|&c| c == 2));
        assert_eq!(rows, [4, 4, 4]);
    }

    #[test]
    fn regular_over_many_seeds() {
        for seed in 0..120 {
            let s = SpreadingMatrix::generate(&cfg(8, 110, 4), seed).unwrap();
            let (cols, rows) = degrees(&s);
            assert!(cols.iter().all(|&c| c == 4));
            assert!(rows.iter().all(|&r| r == 55), "seed {seed}: {rows:?}");
            for k in 0..110 {
                assert!(s.support(k).windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn degree_one_square_is_permutation() {
        let s = SpreadingMatrix::generate(&cfg(5, 5, 1), 9).unwrap();
        let mut rows: Vec<usize> = (0..5).map(|k| s.support(k)[0]).collect();
        rows.sort_unstable();
        assert_eq!(rows, [0, 1, 2, 3, 4]);
    }

    #[test]
    fn deterministic_under_seed() {
        let c = cfg(8, 110, 4);
        assert_eq!(
            SpreadingMatrix::generate(&c, 5).unwrap(),
            SpreadingMatrix::generate(&c, 5).unwrap()
        );
        assert_ne!(
            SpreadingMatrix::generate(&c, 5).unwrap(),
            SpreadingMatrix::generate(&c, 6).unwrap()
        );
    }

    #[test]
    fn non_divisible_is_config_error() {
        assert!(matches!(
            SpreadingMatrix::generate(&cfg(4, 5, 2), 0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn from_supports_rejects_irregular() {
        assert!(SpreadingMatrix::from_supports(2, alloc::vec![alloc::vec![0], alloc::vec![0]]).is_err());
        assert!(SpreadingMatrix::from_supports(2, alloc::vec![alloc::vec![1], alloc::vec![0]]).is_ok());
    }
}
