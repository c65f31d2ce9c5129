//! Mini-batch gradient descent on the unrolled network.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::backward::accumulate_gradient;
use super::forward::forward;
use super::weights::WeightBank;
use crate::rng::{derive_seed, seeded};
use crate::scenario::{SampleRealization, Scenario};
use crate::{Error, Result};

/// Samples folded into one partial sum before the ordered reduction.
const CHUNK: usize = 8;

/// Epoch loss above this multiple of the initial loss aborts training.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Seed of the per-epoch shuffle.
    pub shuffle_seed: u64,
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidConfig("learning rate must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Per-epoch mean losses of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    /// Mean loss of the first batch before any update.
    pub initial_loss: f64,
    pub epoch_losses: Vec<f64>,
}

/// `size` independent draws from `scenario`, sample `i` seeded by
/// `derive_seed(seed, 0, i)`.
pub fn training_set(scenario: &Scenario, size: usize, seed: u64) -> Vec<SampleRealization> {
    (0..size)
        .map(|i| scenario.draw(derive_seed(seed, 0, i as u64)))
        .collect()
}

/// Mean loss and mean gradient over `batch`.
///
/// Samples are summed in fixed chunks and the chunk sums reduced in order,
/// so the result does not depend on the number of worker threads.
pub fn batch_gradient(
    bank: &WeightBank,
    scenario: &Scenario,
    batch: &[&SampleRealization],
) -> Result<(f64, Vec<f64>)> {
    let len = bank.as_slice().len();
    let chunk_sum = |chunk: &[&SampleRealization]| -> Result<(f64, Vec<f64>)> {
        let mut grad = alloc::vec![0.0; len];
        let mut total = 0.0;
        for s in chunk {
            let pass = forward(bank, &s.y, &scenario.measurement, &scenario.config)?;
            total += accumulate_gradient(
                bank,
                &pass,
                &s.y,
                &s.h_bar,
                &scenario.measurement,
                &scenario.config,
                &mut grad,
            );
        }
        Ok((total, grad))
    };

    #[cfg(feature = "parallel")]
    let partials: Vec<Result<(f64, Vec<f64>)>> = {
        use rayon::prelude::*;
        batch.par_chunks(CHUNK).map(chunk_sum).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Result<(f64, Vec<f64>)>> = batch.chunks(CHUNK).map(chunk_sum).collect();

    let mut total = 0.0;
    let mut grad = alloc::vec![0.0; len];
    for p in partials {
        let (l, g) = p?;
        total += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    let n = batch.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((total / n, grad))
}

/// `w ← w − lr g` on trainable entries; fixed entries are untouched.
pub fn sgd_step(bank: &mut WeightBank, grad: &[f64], learning_rate: f64, trainable: &[bool]) {
    for ((w, g), &t) in bank.as_mut_slice().iter_mut().zip(grad).zip(trainable) {
        if t {
            *w -= learning_rate * g;
        }
    }
}

/// Trains `bank` in place on the fixed set `data`, reshuffled every epoch.
///
/// `on_epoch(epoch, mean_loss)` is called after each epoch (epochs count
/// from 1). Returns [`Error::Diverged`] as soon as an epoch's mean loss is
/// non-finite or exceeds [`DIVERGENCE_FACTOR`] times the initial loss.
pub fn train(
    bank: &mut WeightBank,
    scenario: &Scenario,
    data: &[SampleRealization],
    tc: &TrainingConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainingReport> {
    tc.validate()?;
    bank.ensure_fits(&scenario.measurement, bank.blocks())?;
    let trainable = bank.trainable_mask();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut initial_loss = None;
    let mut epoch_losses = Vec::with_capacity(tc.epochs);

    for epoch in 1..=tc.epochs {
        order.sort_unstable();
        order.shuffle(&mut seeded(derive_seed(tc.shuffle_seed, 2, epoch as u64)));
        let mut sum = 0.0;
        let mut batches = 0usize;
        for idx in order.chunks(tc.batch_size) {
            let batch: Vec<&SampleRealization> = idx.iter().map(|&i| &data[i]).collect();
            let (loss, grad) = batch_gradient(bank, scenario, &batch)?;
            initial_loss.get_or_insert(loss);
            sgd_step(bank, &grad, tc.learning_rate, &trainable);
            sum += loss;
            batches += 1;
        }
        let mean = sum / batches.max(1) as f64;
        epoch_losses.push(mean);
        on_epoch(epoch, mean);
        let initial = initial_loss.unwrap_or(mean);
        if !mean.is_finite() || mean > DIVERGENCE_FACTOR * initial {
            return Err(Error::Diverged {
                epoch,
                loss: mean,
                initial,
            });
        }
    }
    Ok(TrainingReport {
        initial_loss: initial_loss.unwrap_or(0.0),
        epoch_losses,
    })
}
