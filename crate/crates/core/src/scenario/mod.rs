//! Pilots, spreading patterns, the vectorized measurement model and sample
//! synthesis.

mod measurement;
mod pilots;
mod spreading;

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

pub use measurement::EffectiveMeasurement;
pub use pilots::{zc_symbol, PilotMatrix, PilotOrigin};
pub use spreading::{SpreadingMatrix, MAX_SAMPLER_ATTEMPTS};

use crate::{config::noise_variance, rng, Error, Result, SystemConfig};

/// One realized system: configuration plus the fixed spreading, pilot and
/// measurement matrices shared by every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: SystemConfig,
    pub spreading: SpreadingMatrix,
    pub pilots: PilotMatrix,
    pub measurement: EffectiveMeasurement,
}

impl Scenario {
    /// Zadoff-Chu pilots and a spreading matrix sampled from `cfg.seed`.
    pub fn generate(cfg: &SystemConfig) -> Result<Self> {
        let pilots = PilotMatrix::zadoff_chu(cfg)?;
        let spreading = SpreadingMatrix::generate(cfg, cfg.seed)?;
        Self::new(cfg.clone(), spreading, pilots)
    }

    /// Assembles a scenario from explicit parts, checking dimensions.
    pub fn new(config: SystemConfig, spreading: SpreadingMatrix, pilots: PilotMatrix) -> Result<Self> {
        config.validate()?;
        let checks = [
            ("spreading users", config.users, spreading.users()),
            ("spreading sub-carriers", config.subcarriers, spreading.subcarriers()),
            ("spreading degree", config.spreading_degree, spreading.column_degree()),
            ("pilot users", config.users, pilots.users()),
            ("pilot length", config.pilot_len, pilots.len()),
        ];
        for (what, expected, found) in checks {
            if expected != found {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    found,
                });
            }
        }
        let measurement = EffectiveMeasurement::build(&pilots, &spreading)?;
        Ok(Self {
            config,
            spreading,
            pilots,
            measurement,
        })
    }

    /// Toy scenario with random-phase pilots, for dimensions where the
    /// Zadoff-Chu pool is too small.
    pub fn with_random_pilots(cfg: &SystemConfig) -> Result<Self> {
        let spreading = SpreadingMatrix::generate(cfg, cfg.seed)?;
        let pilots = PilotMatrix::random_phase(cfg.pilot_len, cfg.users, rng::derive_seed(cfg.seed, 1, 0));
        Self::new(cfg.clone(), spreading, pilots)
    }

    /// Draws activity, channels and noise at the configured SNR.
    pub fn draw(&self, seed: u64) -> SampleRealization {
        self.draw_with_noise(noise_variance(self.config.snr_db), seed)
    }

    /// Draws activity, channels and noise with an explicit noise variance.
    pub fn draw_with_noise(&self, sigma_w2: f64, seed: u64) -> SampleRealization {
        let alpha = sample_activity(&self.config, rng::derive_seed(seed, 0, 0));
        let h_bar = sample_channels(&self.config, &alpha, rng::derive_seed(seed, 0, 1));
        let y = synthesize_observation(&self.measurement, &h_bar, sigma_w2, rng::derive_seed(seed, 0, 2));
        SampleRealization {
            alpha,
            h_bar,
            y,
            sigma_w2,
        }
    }
}

/// One Monte-Carlo draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRealization {
    /// Activity indicator per user.
    pub alpha: Vec<bool>,
    /// Effective channel, `d_c K` entries, zero blocks for inactive users.
    pub h_bar: Vec<Complex64>,
    /// Observation `P̄ h̄ + w`, `L_t N` entries.
    pub y: Vec<Complex64>,
    /// Noise variance used for `w`.
    pub sigma_w2: f64,
}

impl SampleRealization {
    pub fn active_users(&self) -> Vec<usize> {
        self.alpha
            .iter()
            .enumerate()
            .filter_map(|(k, &a)| a.then_some(k))
            .collect()
    }
}

/// I.i.d. Bernoulli(`P_a`) activity.
pub fn sample_activity(cfg: &SystemConfig, seed: u64) -> Vec<bool> {
    let mut r = rng::seeded(seed);
    let p = cfg.activation_prob;
    (0..cfg.users).map(|_| r.random::<f64>() < p).collect()
}

/// `CN(0, 1)` gains on each active user's `d_c` sub-carriers, exact zeros
/// elsewhere.
///
/// Gains are drawn for every user so an active user's channel does not
/// depend on the activity of the others.
pub fn sample_channels(cfg: &SystemConfig, alpha: &[bool], seed: u64) -> Vec<Complex64> {
    let mut r = rng::seeded(seed);
    let dc = cfg.spreading_degree;
    let mut h = Vec::with_capacity(cfg.users * dc);
    for &active in alpha.iter().take(cfg.users) {
        for _ in 0..dc {
            let g = rng::complex_normal(&mut r, 1.0);
            h.push(if active { g } else { Complex64::new(0.0, 0.0) });
        }
    }
    h
}

/// `y = P̄ h̄ + w` with `w ~ CN(0, sigma_w2 I)`.
pub fn synthesize_observation(
    measurement: &EffectiveMeasurement,
    h_bar: &[Complex64],
    sigma_w2: f64,
    seed: u64,
) -> Vec<Complex64> {
    let mut y = measurement.apply(h_bar);
    if sigma_w2 > 0.0 {
        let mut r = rng::seeded(seed);
        for v in &mut y {
            *v += rng::complex_normal(&mut r, sigma_w2);
        }
    }
    y
}
