//! Text serialization of a [`WeightBank`].
//!
//! ```text
//! nora-bsbl-weights v1 K=20 N=8 L_t=11 d_c=4 N_it=10
//! block=1 name=lambda->A1v nnz=880
//! 0 0 1.0000000000000000e0
//! ...
//! ```
//!
//! Blocks are numbered from 1; each record lists the matrix's pattern
//! positions `i j` in row-major order with the value to 17 significant
//! digits, so a save/load round trip is exact.

use std::fmt::Write as _;
use std::path::Path;

use nora_core::unrolled::{BankDims, WeightBank, WeightId, WeightMask};
use nora_core::EffectiveMeasurement;

use crate::error::{Error, Result};

const MAGIC: &str = "nora-bsbl-weights v1";

pub fn to_string(bank: &WeightBank, meas: &EffectiveMeasurement) -> Result<String> {
    bank.ensure_fits(meas, bank.blocks())?;
    let d = bank.dims();
    let mut out = format!(
        "{MAGIC} K={} N={} L_t={} d_c={} N_it={}\n",
        d.users, d.subcarriers, d.pilot_len, d.degree, d.blocks
    );
    let masks: Vec<WeightMask> = WeightId::ALL.iter().map(|&id| WeightMask::build(id, meas)).collect();
    let orders: Vec<Vec<usize>> = masks.iter().map(WeightMask::row_major_slots).collect();
    for l in 0..bank.blocks() {
        for ((id, mask), order) in WeightId::ALL.iter().zip(&masks).zip(&orders) {
            let values = bank.get(l, *id);
            let _ = writeln!(out, "block={} name={} nnz={}", l + 1, id.name(), mask.nnz());
            for &s in order {
                let (i, j) = mask.pattern[s];
                let _ = writeln!(out, "{i} {j} {:.16e}", values[s]);
            }
        }
    }
    Ok(out)
}

pub fn save(bank: &WeightBank, meas: &EffectiveMeasurement, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(bank, meas)?).map_err(|e| Error::io(path, e))
}

/// Parses a bank and checks it against the measurement structure: every
/// record must list exactly its mask's positions and fixed matrices must
/// hold ones.
pub fn parse(text: &str, meas: &EffectiveMeasurement) -> Result<WeightBank> {
    let err = |line: usize, msg: &str| Error::parse("weight file", line, msg);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let fields = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| err(1, "missing `nora-bsbl-weights v1` header"))?;
    let mut dims = BankDims::of(meas, 0);
    let mut seen = 0;
    for f in fields.split_whitespace() {
        let (k, v) = f.split_once('=').ok_or_else(|| err(1, "malformed header field"))?;
        let v: usize = v.parse().map_err(|_| err(1, "malformed header value"))?;
        seen += 1;
        match k {
            "K" => dims.users = v,
            "N" => dims.subcarriers = v,
            "L_t" => dims.pilot_len = v,
            "d_c" => dims.degree = v,
            "N_it" => dims.blocks = v,
            _ => return Err(err(1, "unknown header field")),
        }
    }
    if seen != 5 {
        return Err(err(1, "header needs K, N, L_t, d_c and N_it"));
    }
    BankDims::of(meas, dims.blocks)
        .ensure_matches(&dims)
        .map_err(|e| Error::IncompatibleWeights(e.to_string()))?;

    let mut bank = WeightBank::ones(meas, dims.blocks);
    let masks: Vec<WeightMask> = WeightId::ALL.iter().map(|&id| WeightMask::build(id, meas)).collect();
    let orders: Vec<Vec<usize>> = masks.iter().map(WeightMask::row_major_slots).collect();
    for l in 0..dims.blocks {
        for ((&id, mask), order) in WeightId::ALL.iter().zip(&masks).zip(&orders) {
            let expected = format!("block={} name={} nnz={}", l + 1, id.name(), mask.nnz());
            match lines.next() {
                Some((_, h)) if h.trim() == expected => {}
                Some((i, _)) => return Err(err(i, &format!("expected `{expected}`"))),
                None => return Err(err(0, &format!("truncated before `{expected}`"))),
            }
            let values = bank.get_mut(l, id);
            for &s in order {
                let (i, line) = lines
                    .next()
                    .ok_or_else(|| err(0, &format!("truncated inside block {} {}", l + 1, id.name())))?;
                let mut tok = line.split_whitespace();
                let mut next = || tok.next().ok_or_else(|| err(i, "expected `i j value`"));
                let (pi, pj, pv) = (next()?, next()?, next()?);
                let pos: (usize, usize) = (
                    pi.parse().map_err(|_| err(i, "bad row index"))?,
                    pj.parse().map_err(|_| err(i, "bad column index"))?,
                );
                if pos != mask.pattern[s] {
                    return Err(err(i, "position is off the pattern or out of order"));
                }
                let v: f64 = pv.parse().map_err(|_| err(i, "bad value"))?;
                if !v.is_finite() {
                    return Err(err(i, "non-finite weight"));
                }
                if id.is_fixed() && v != 1.0 {
                    return Err(err(i, "fixed weight differs from 1"));
                }
                values[s] = v;
            }
        }
    }
    if let Some((i, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(err(i, "trailing content"));
    }
    Ok(bank)
}

pub fn load(path: &Path, meas: &EffectiveMeasurement) -> Result<WeightBank> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, meas)
}
