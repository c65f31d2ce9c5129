//! Scenario dimensions and estimator hyper-parameters.

use alloc::format;

use crate::{Error, Result};

/// Every dimension and hyper-parameter of one grant-free access scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of potential users `K`.
    pub users: usize,
    /// Number of sub-carriers `N`.
    pub subcarriers: usize,
    /// Pilot length `L_t` in symbols.
    pub pilot_len: usize,
    /// Sub-carriers per user `d_c`.
    pub spreading_degree: usize,
    /// Per-user activation probability `P_a`.
    pub activation_prob: f64,
    pub snr_db: f64,
    /// Activity threshold on `1/gamma`.
    pub gamma_th: f64,
    /// Gamma-prior shape `a`.
    pub prior_a: f64,
    /// Gamma-prior rate `b`.
    pub prior_b: f64,
    /// Number of message-passing iterations `N_it`.
    pub iterations: usize,
    pub seed: u64,
}

impl SystemConfig {
    /// Simulation parameters of the reference crowded scenario:
    /// 110 users on 8 sub-carriers, length-11 pilots, 4 sub-carriers per user.
    pub fn table_iv() -> Self {
        Self {
            users: 110,
            subcarriers: 8,
            pilot_len: 11,
            spreading_degree: 4,
            activation_prob: 0.1,
            snr_db: 15.0,
            gamma_th: 0.1,
            prior_a: 1e-4,
            prior_b: 1e-4,
            iterations: 20,
            seed: 0,
        }
    }

    /// Reduced preset for CI runs.
    pub fn small() -> Self {
        Self {
            users: 20,
            ..Self::table_iv()
        }
    }

    /// Row degree `d_r = K d_c / N`: users sharing each sub-carrier.
    pub fn row_degree(&self) -> usize {
        self.users * self.spreading_degree / self.subcarriers
    }

    /// Length of the effective channel vector, `d_c K`.
    pub fn channel_len(&self) -> usize {
        self.users * self.spreading_degree
    }

    /// Length of the observation vector, `L_t N`.
    pub fn observation_len(&self) -> usize {
        self.pilot_len * self.subcarriers
    }

    /// Noise variance implied by `snr_db` with unit-modulus pilots and
    /// unit-variance channels.
    pub fn noise_variance(&self) -> f64 {
        noise_variance(self.snr_db)
    }

    /// Checks the structural invariants that do not depend on the pilot family.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if self.users == 0 || self.subcarriers == 0 {
            return bad(format!(
                "K={} and N={} must be positive",
                self.users, self.subcarriers
            ));
        }
        if self.spreading_degree == 0 || self.spreading_degree > self.subcarriers {
            return bad(format!(
                "d_c={} must lie in 1..={}",
                self.spreading_degree, self.subcarriers
            ));
        }
        if (self.users * self.spreading_degree) % self.subcarriers != 0 {
            return bad(format!(
                "K*d_c={} is not divisible by N={}",
                self.users * self.spreading_degree,
                self.subcarriers
            ));
        }
        if self.pilot_len < 2 {
            return bad(format!("L_t={} must be at least 2", self.pilot_len));
        }
        if !(0.0..=1.0).contains(&self.activation_prob) {
            return bad(format!("P_a={} outside [0, 1]", self.activation_prob));
        }
        if !self.snr_db.is_finite() {
            return bad(format!("snr_db={} is not finite", self.snr_db));
        }
        if !(self.gamma_th > 0.0) {
            return bad(format!("gamma_th={} must be positive", self.gamma_th));
        }
        if !(self.prior_a >= 0.0) || !(self.prior_b > 0.0) {
            return bad(format!(
                "Gamma prior a={} b={} needs a >= 0 and b > 0",
                self.prior_a, self.prior_b
            ));
        }
        if self.iterations == 0 {
            return bad(format!("N_it must be positive"));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the requirements of Zadoff-Chu
    /// pilot generation: prime `L_t` and `K <= L_t (L_t - 1)`.
    pub fn validate_for_zc(&self) -> Result<()> {
        self.validate()?;
        if !is_prime(self.pilot_len) {
            return Err(Error::InvalidConfig(format!(
                "L_t={} is not prime",
                self.pilot_len
            )));
        }
        let pool = self.pilot_len * (self.pilot_len - 1);
        if self.users > pool {
            return Err(Error::PilotCapacity {
                users: self.users,
                pool,
            });
        }
        Ok(())
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::table_iv()
    }
}

/// `sigma_w^2 = 10^(-snr_db / 10)`.
pub fn noise_variance(snr_db: f64) -> f64 {
    libm::pow(10.0, -snr_db / 10.0)
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
