//! Offline training runs and their loss logs.

use std::path::Path;

use nora_core::unrolled::{train, training_set, TrainingConfig, TrainingReport, WeightBank};
use nora_core::Scenario;

use crate::config_file::KeyValues;
use crate::error::{Error, Result};

/// Training hyper-parameters and data-set sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSettings {
    pub train_set_size: usize,
    pub test_set_size: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl TrainingSettings {
    /// Reference settings: 10^5 training and test samples, batches of 200,
    /// 20 epochs at rate 10^-3.
    pub fn table_iv() -> Self {
        Self {
            train_set_size: 100_000,
            test_set_size: 100_000,
            batch_size: 200,
            epochs: 20,
            learning_rate: 1e-3,
        }
    }

    /// Desk-scale preset with a 10^4-sample training set.
    pub fn small() -> Self {
        Self {
            train_set_size: 10_000,
            test_set_size: 1_000,
            ..Self::table_iv()
        }
    }

    pub fn with_overrides(&self, kv: &KeyValues) -> Result<Self> {
        let mut s = self.clone();
        if let Some(v) = kv.typed("train_set_size")? {
            s.train_set_size = v;
        }
        if let Some(v) = kv.typed("test_set_size")? {
            s.test_set_size = v;
        }
        if let Some(v) = kv.typed("batch_size")? {
            s.batch_size = v;
        }
        if let Some(v) = kv.typed("epochs")? {
            s.epochs = v;
        }
        if let Some(v) = kv.typed("learning_rate")? {
            s.learning_rate = v;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_set_size == 0 || self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config(
                "train_set_size, batch_size and epochs must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }

    pub fn core(&self, shuffle_seed: u64) -> TrainingConfig {
        TrainingConfig {
            batch_size: self.batch_size,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            shuffle_seed,
        }
    }
}

/// Trains `bank` on a fresh set of `train_set_size` samples drawn from
/// `data_seed`; the shuffle order is also derived from `data_seed`.
pub fn train_on_fresh_data(
    bank: &mut WeightBank,
    scenario: &Scenario,
    settings: &TrainingSettings,
    data_seed: u64,
    on_epoch: impl FnMut(usize, f64),
) -> Result<TrainingReport> {
    settings.validate()?;
    let data = training_set(scenario, settings.train_set_size, data_seed);
    Ok(train(bank, scenario, &data, &settings.core(data_seed), on_epoch)?)
}

/// `epoch,mean_loss` CSV.
pub fn loss_log_csv(report: &TrainingReport) -> String {
    let mut out = String::from("epoch,mean_loss\n");
    for (i, l) in report.epoch_losses.iter().enumerate() {
        out.push_str(&format!("{},{:.16e}\n", i + 1, l));
    }
    out
}

pub fn save_loss_log(report: &TrainingReport, path: &Path) -> Result<()> {
    std::fs::write(path, loss_log_csv(report)).map_err(|e| Error::io(path, e))
}
