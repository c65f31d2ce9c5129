//! `key = value` configuration files.
//!
//! System keys use the parameter symbols: `K`, `N`, `L_t`, `d_c`, `P_a`,
//! `gamma_th`, `snr_db`, `N_it`, `a`, `b`, `seed`. Training keys:
//! `train_set_size`, `test_set_size`, `batch_size`, `epochs`,
//! `learning_rate`. Sweep keys: `sweep`, `values`, `algorithms`, `samples`,
//! `weights`, `output`, `master_seed`. Blank lines and `#` comments are
//! ignored.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use nora_core::SystemConfig;

use crate::error::{Error, Result};

pub const SYSTEM_KEYS: [&str; 11] = ["K", "N", "L_t", "d_c", "P_a", "gamma_th", "snr_db", "N_it", "a", "b", "seed"];
pub const TRAINING_KEYS: [&str; 5] = ["train_set_size", "test_set_size", "batch_size", "epochs", "learning_rate"];
pub const SWEEP_KEYS: [&str; 7] = ["sweep", "values", "algorithms", "samples", "weights", "output", "master_seed"];

/// Parsed key/value pairs, in key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("config", i + 1, "expected key = value"))?;
            let key = k.trim();
            if !is_known(key) {
                return Err(Error::parse("config", i + 1, format!("unknown key `{key}`")));
            }
            entries.insert(key.to_string(), v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Sets `key` from a `key=value` override string.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{pair}` is not key=value")))?;
        let key = k.trim();
        if !is_known(key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn typed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("cannot parse {key} = `{v}`")))
            })
            .transpose()
    }

    /// `base` with every system key present here applied.
    pub fn system(&self, base: &SystemConfig) -> Result<SystemConfig> {
        let mut c = base.clone();
        macro_rules! apply {
            ($key:literal, $field:ident) => {
                if let Some(v) = self.typed($key)? {
                    c.$field = v;
                }
            };
        }
        apply!("K", users);
        apply!("N", subcarriers);
        apply!("L_t", pilot_len);
        apply!("d_c", spreading_degree);
        apply!("P_a", activation_prob);
        apply!("gamma_th", gamma_th);
        apply!("snr_db", snr_db);
        apply!("N_it", iterations);
        apply!("a", prior_a);
        apply!("b", prior_b);
        apply!("seed", seed);
        c.validate()?;
        Ok(c)
    }
}

fn is_known(key: &str) -> bool {
    SYSTEM_KEYS.contains(&key) || TRAINING_KEYS.contains(&key) || SWEEP_KEYS.contains(&key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies_system_keys() {
        let kv = KeyValues::parse("# small run\nK = 20\nsnr_db=10 # dB\n\nN_it = 5\n").unwrap();
        let c = kv.system(&SystemConfig::table_iv()).unwrap();
        assert_eq!((c.users, c.snr_db, c.iterations), (20, 10.0, 5));
        assert_eq!(c.subcarriers, 8);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(KeyValues::parse("users = 3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(KeyValues::parse("K\n"), Err(Error::Parse { .. })));
        let kv = KeyValues::parse("K = many").unwrap();
        assert!(matches!(kv.system(&SystemConfig::table_iv()), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_replace_values() {
        let mut kv = KeyValues::parse("P_a = 0.2").unwrap();
        kv.set_pair("P_a=0.05").unwrap();
        assert_eq!(kv.typed::<f64>("P_a").unwrap(), Some(0.05));
        assert!(kv.set_pair("bogus=1").is_err());
    }
}
