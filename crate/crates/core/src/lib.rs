//! Joint user-activity detection and channel estimation for grant-free
//! non-orthogonal random access over LDS-OFDM.
//!
//! The crate is `no_std` (with `alloc`) and covers the whole numerical
//! pipeline:
//!
//! - [`scenario`]: Zadoff-Chu pilots, regular LDS spreading, the vectorized
//!   measurement matrix and Monte-Carlo sample synthesis.
//! - [`mp_bsbl`]: the message-passing block sparse Bayesian learning
//!   iteration with threshold-based activity detection.
//! - [`unrolled`]: the same iteration unrolled into a layered network with
//!   masked trainable weights, exact reverse-mode gradients and SGD.
//! - [`baselines`]: genie-aided MMSE and block OMP comparators.
//! - [`metrics`]: NMSE and activity-detection error counts.
//!
//! File formats, the experiment driver and the command line live in the
//! companion `nora` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod baselines;
pub mod config;
mod error;
pub mod linalg;
pub mod metrics;
pub mod mp_bsbl;
pub mod rng;
pub mod scenario;
pub mod unrolled;

pub use config::SystemConfig;
pub use scenario::{EffectiveMeasurement, Scenario};
pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Lower bound applied to every computed variance and to the precision
/// denominators.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    if x < VARIANCE_FLOOR {
        VARIANCE_FLOOR
    } else {
        x
    }
}
