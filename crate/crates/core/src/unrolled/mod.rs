//! MP-BSBL unrolled into a layered network with per-connection weights.
//!
//! Each block mirrors one message-passing iteration. Every connection
//! between layers carries a weight matrix restricted to the sparsity
//! pattern of the measurement graph; with all weights at one the network
//! reproduces MP-BSBL exactly.

mod backward;
mod forward;
mod train;
mod weights;

pub use backward::{accumulate_gradient, gradient, loss};
pub use forward::{forward, forward_block, BlockCarry, BlockInput, BlockTrace, ForwardPass};
pub use train::{
    batch_gradient, sgd_step, train, training_set, TrainingConfig, TrainingReport, DIVERGENCE_FACTOR,
};
pub use weights::{
    build_masks, domain_len, BankDims, BlockWeights, Domain, Layout, WeightBank, WeightId, WeightMask,
};

use num_complex::Complex64;

use crate::mp_bsbl::Detection;
use crate::{Result, Scenario};

/// Detection and estimation with a trained bank; one block per iteration.
pub fn run_network(bank: &WeightBank, scenario: &Scenario, y: &[Complex64]) -> Result<Detection> {
    let pass = forward(bank, y, &scenario.measurement, &scenario.config)?;
    Ok(Detection::from_posterior(pass.m_h(), pass.gamma().to_vec(), &scenario.config))
}
