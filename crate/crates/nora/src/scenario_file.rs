//! Plain-text scenario files: spreading supports and pilot provenance.
//!
//! ```text
//! nora-scenario v1 K=20 N=8 L_t=11 d_c=4 seed=0
//! [supports]
//! 0: 1 3 4 6
//! [pilots]
//! 0: zc 1 0
//! ```
//!
//! Custom pilots are written as `k: custom re im re im ...`.

use std::fmt::Write as _;
use std::path::Path;

use nora_core::scenario::{PilotMatrix, PilotOrigin, SpreadingMatrix};
use nora_core::{Complex64, Scenario, SystemConfig};

use crate::error::{Error, Result};

const MAGIC: &str = "nora-scenario v1";

pub fn to_string(sc: &Scenario) -> String {
    let c = &sc.config;
    let mut out = format!(
        "{MAGIC} K={} N={} L_t={} d_c={} seed={}\n[supports]\n",
        c.users, c.subcarriers, c.pilot_len, c.spreading_degree, c.seed
    );
    for k in 0..c.users {
        let s: Vec<String> = sc.spreading.support(k).iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "{k}: {}", s.join(" "));
    }
    out.push_str("[pilots]\n");
    for k in 0..c.users {
        match sc.pilots.origin(k) {
            PilotOrigin::ZadoffChu { root, shift } => {
                let _ = writeln!(out, "{k}: zc {root} {shift}");
            }
            PilotOrigin::Custom => {
                let _ = write!(out, "{k}: custom");
                for v in sc.pilots.column(k) {
                    let _ = write!(out, " {:.16e} {:.16e}", v.re, v.im);
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn save(sc: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(sc)).map_err(|e| Error::io(path, e))
}

/// Rebuilds a scenario; dimensions and seed come from the file, the other
/// parameters from `base`.
pub fn parse(text: &str, base: &SystemConfig) -> Result<Scenario> {
    let err = |line: usize, msg: &str| Error::parse("scenario file", line, msg);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let fields = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| err(1, "missing `nora-scenario v1` header"))?;
    let mut cfg = base.clone();
    for f in fields.split_whitespace() {
        let (k, v) = f.split_once('=').ok_or_else(|| err(1, "malformed header field"))?;
        let bad = || err(1, "malformed header value");
        match k {
            "K" => cfg.users = v.parse().map_err(|_| bad())?,
            "N" => cfg.subcarriers = v.parse().map_err(|_| bad())?,
            "L_t" => cfg.pilot_len = v.parse().map_err(|_| bad())?,
            "d_c" => cfg.spreading_degree = v.parse().map_err(|_| bad())?,
            "seed" => cfg.seed = v.parse().map_err(|_| bad())?,
            _ => return Err(err(1, "unknown header field")),
        }
    }

    expect_section(&mut lines, "[supports]")?;
    let mut supports = Vec::with_capacity(cfg.users);
    for k in 0..cfg.users {
        let (i, body) = record(&mut lines, k)?;
        let s: Result<Vec<usize>> = body
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(i, "bad sub-carrier index")))
            .collect();
        supports.push(s?);
    }
    expect_section(&mut lines, "[pilots]")?;
    let mut zc = Vec::with_capacity(cfg.users);
    let mut custom = Vec::with_capacity(cfg.users * cfg.pilot_len);
    let mut all_zc = true;
    for k in 0..cfg.users {
        let (i, body) = record(&mut lines, k)?;
        let mut tok = body.split_whitespace();
        let kind = tok.next().ok_or_else(|| err(i, "missing pilot kind"))?;
        let nums: Vec<&str> = tok.collect();
        match kind {
            "zc" if nums.len() == 2 => {
                let root = nums[0].parse().map_err(|_| err(i, "bad root"))?;
                let shift = nums[1].parse().map_err(|_| err(i, "bad shift"))?;
                zc.push((root, shift));
            }
            "custom" if nums.len() == 2 * cfg.pilot_len => {
                all_zc = false;
                let v: Result<Vec<f64>> = nums
                    .iter()
                    .map(|t| t.parse().map_err(|_| err(i, "bad pilot value")))
                    .collect();
                custom.push(v?);
            }
            _ => return Err(err(i, "malformed pilot record")),
        }
    }
    if let Some((i, _)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(err(i, "trailing content"));
    }

    let spreading = SpreadingMatrix::from_supports(cfg.subcarriers, supports)?;
    let pilots = if all_zc {
        PilotMatrix::from_origins(cfg.pilot_len, &zc)?
    } else if zc.is_empty() {
        // Columns are stored per user; the matrix is row-major.
        let mut entries = vec![Complex64::new(0.0, 0.0); cfg.pilot_len * cfg.users];
        for (k, col) in custom.iter().enumerate() {
            for l in 0..cfg.pilot_len {
                entries[l * cfg.users + k] = Complex64::new(col[2 * l], col[2 * l + 1]);
            }
        }
        PilotMatrix::from_entries(cfg.pilot_len, cfg.users, entries)?
    } else {
        return Err(err(0, "mixed pilot kinds are not supported"));
    };
    Ok(Scenario::new(cfg, spreading, pilots)?)
}

pub fn load(path: &Path, base: &SystemConfig) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, base)
}

fn record<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, k: usize) -> Result<(usize, &'a str)> {
    let (i, line) = lines
        .next()
        .ok_or_else(|| Error::parse("scenario file", 0, format!("truncated before user {k}")))?;
    let (idx, body) = line
        .split_once(':')
        .ok_or_else(|| Error::parse("scenario file", i, "expected `k: ...`"))?;
    if idx.trim().parse::<usize>().ok() != Some(k) {
        return Err(Error::parse("scenario file", i, format!("expected record for user {k}")));
    }
    Ok((i, body.trim()))
}

fn expect_section<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, name: &str) -> Result<()> {
    match lines.next() {
        Some((_, l)) if l == name => Ok(()),
        Some((i, _)) => Err(Error::parse("scenario file", i, format!("expected {name}"))),
        None => Err(Error::parse("scenario file", 0, format!("missing {name}"))),
    }
}
