#![allow(dead_code)]

use nora_core::rng::{derive_seed, seeded};
use nora_core::unrolled::WeightBank;
use nora_core::{Scenario, SystemConfig};
use rand::Rng;

/// Toy system: 8 users on 4 sub-carriers, pilots of length 3, 2
/// sub-carriers per user.
pub fn toy_config(seed: u64) -> SystemConfig {
    SystemConfig {
        users: 8,
        subcarriers: 4,
        pilot_len: 3,
        spreading_degree: 2,
        activation_prob: 0.4,
        snr_db: 10.0,
        iterations: 10,
        seed,
        ..SystemConfig::table_iv()
    }
}

pub fn toy_scenario(seed: u64) -> Scenario {
    Scenario::with_random_pilots(&toy_config(seed)).unwrap()
}

/// Trainable weights drawn uniformly from `[lo, hi)`.
pub fn random_bank(scenario: &Scenario, blocks: usize, lo: f64, hi: f64, seed: u64) -> WeightBank {
    let mut bank = WeightBank::ones(&scenario.measurement, blocks);
    let mask = bank.trainable_mask();
    let mut r = seeded(derive_seed(seed, 7, 0));
    for (w, t) in bank.as_mut_slice().iter_mut().zip(mask) {
        if t {
            *w = r.random_range(lo..hi);
        }
    }
    bank
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
