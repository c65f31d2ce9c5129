//! Binary sample files.
//!
//! Layout (little endian): magic `NORA1`; header `K, N, L_t, d_c, size,
//! seed` as `u64` and `snr_db` as `f64`; then `size` records of `K` activity
//! bytes, `d_c K` complex channel entries and `L_t N` complex observations
//! (each as `re, im` `f64` pairs) and one `f64` noise variance.

use std::io::{Read, Write};
use std::path::Path;

use nora_core::rng::derive_seed;
use nora_core::scenario::SampleRealization;
use nora_core::{Complex64, Scenario};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"NORA1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetHeader {
    pub users: u64,
    pub subcarriers: u64,
    pub pilot_len: u64,
    pub degree: u64,
    pub size: u64,
    pub seed: u64,
    pub snr_db: f64,
}

impl DatasetHeader {
    pub fn for_scenario(sc: &Scenario, size: usize, seed: u64) -> Self {
        let c = &sc.config;
        Self {
            users: c.users as u64,
            subcarriers: c.subcarriers as u64,
            pilot_len: c.pilot_len as u64,
            degree: c.spreading_degree as u64,
            size: size as u64,
            seed,
            snr_db: c.snr_db,
        }
    }

    fn channel_len(&self) -> usize {
        (self.degree * self.users) as usize
    }

    fn observation_len(&self) -> usize {
        (self.pilot_len * self.subcarriers) as usize
    }

    /// Errors unless the structural dimensions equal the scenario's.
    pub fn ensure_matches(&self, sc: &Scenario) -> Result<()> {
        let c = &sc.config;
        let want = [c.users, c.subcarriers, c.pilot_len, c.spreading_degree].map(|v| v as u64);
        let got = [self.users, self.subcarriers, self.pilot_len, self.degree];
        if want != got {
            return Err(Error::Config(format!(
                "dataset dimensions (K, N, L_t, d_c) = {got:?} do not match the scenario {want:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub samples: Vec<SampleRealization>,
}

/// `size` draws, sample `i` seeded by `derive_seed(seed, 0, i)`.
pub fn generate(sc: &Scenario, size: usize, seed: u64) -> Dataset {
    Dataset {
        header: DatasetHeader::for_scenario(sc, size, seed),
        samples: (0..size).map(|i| sc.draw(derive_seed(seed, 0, i as u64))).collect(),
    }
}

pub fn write(ds: &Dataset, mut w: impl Write) -> std::io::Result<()> {
    let h = &ds.header;
    w.write_all(MAGIC)?;
    for v in [h.users, h.subcarriers, h.pilot_len, h.degree, h.size, h.seed] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&h.snr_db.to_le_bytes())?;
    for s in &ds.samples {
        let alpha: Vec<u8> = s.alpha.iter().map(|&a| a as u8).collect();
        w.write_all(&alpha)?;
        for c in s.h_bar.iter().chain(&s.y) {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        w.write_all(&s.sigma_w2.to_le_bytes())?;
    }
    Ok(())
}

pub fn read(mut r: impl Read) -> Result<Dataset> {
    let bad = |msg: &str| Error::parse("dataset", 0, msg);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(|_| bad("missing NORA1 magic"))?;
    if &magic != MAGIC {
        return Err(bad("unknown format (expected NORA1)"));
    }
    let mut u = [0u64; 6];
    for v in &mut u {
        *v = read_u64(&mut r).map_err(|_| bad("truncated header"))?;
    }
    let snr_db = read_f64(&mut r).map_err(|_| bad("truncated header"))?;
    let header = DatasetHeader {
        users: u[0],
        subcarriers: u[1],
        pilot_len: u[2],
        degree: u[3],
        size: u[4],
        seed: u[5],
        snr_db,
    };
    let mut samples = Vec::new();
    for i in 0..header.size {
        let trunc = |_| bad(&format!("truncated in record {i}"));
        let mut alpha = vec![0u8; header.users as usize];
        r.read_exact(&mut alpha).map_err(trunc)?;
        if alpha.iter().any(|&a| a > 1) {
            return Err(bad(&format!("activity byte outside 0/1 in record {i}")));
        }
        let mut complex = |n: usize| -> Result<Vec<Complex64>> {
            (0..n)
                .map(|_| Ok(Complex64::new(read_f64(&mut r).map_err(trunc)?, read_f64(&mut r).map_err(trunc)?)))
                .collect()
        };
        let h_bar = complex(header.channel_len())?;
        let y = complex(header.observation_len())?;
        let sigma_w2 = read_f64(&mut r).map_err(trunc)?;
        samples.push(SampleRealization {
            alpha: alpha.into_iter().map(|a| a == 1).collect(),
            h_bar,
            y,
            sigma_w2,
        });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| bad(&e.to_string()))? != 0 {
        return Err(bad("trailing bytes after the last record"));
    }
    Ok(Dataset { header, samples })
}

pub fn save(ds: &Dataset, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    write(ds, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Dataset> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read(std::io::BufReader::new(f))
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
