//! Monte-Carlo sweeps over iteration count, SNR or activation probability.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use nora_core::baselines::{bomp, ga_mmse};
use nora_core::metrics::{nmse, RunningMean, UadErrors};
use nora_core::mp_bsbl::run_mp_bsbl;
use nora_core::rng::derive_seed;
use nora_core::scenario::SampleRealization;
use nora_core::unrolled::{run_network, WeightBank};
use nora_core::{Complex64, Scenario, SystemConfig};

use crate::error::{Error, Result};
use crate::training::{save_loss_log, train_on_fresh_data, TrainingSettings};
use crate::weights_file;

pub const CSV_HEADER: &str = "sweep,algorithm,nmse,uad_error_rate,samples,wall_time_ms";

/// Seed stream of the training set for sweep point `j` is `TRAIN_STREAM + j`.
const TRAIN_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    MpBsbl,
    Dnn,
    GaMmse,
    Bomp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::MpBsbl, Self::Dnn, Self::GaMmse, Self::Bomp];

    pub fn name(self) -> &'static str {
        match self {
            Self::MpBsbl => "mp_bsbl",
            Self::Dnn => "dnn",
            Self::GaMmse => "ga_mmse",
            Self::Bomp => "bomp",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Parses a comma-separated algorithm list.
pub fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Iterations,
    Snr,
    ActivationProb,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::Iterations => "iterations",
            Self::Snr => "snr",
            Self::ActivationProb => "p_a",
        }
    }

    /// `base` with the swept parameter set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut c = base.clone();
        match self {
            Self::Iterations => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::Config(format!("iteration count {value} is not a positive integer")));
                }
                c.iterations = value as usize;
            }
            Self::Snr => c.snr_db = value,
            Self::ActivationProb => c.activation_prob = value,
        }
        c.validate()?;
        Ok(c)
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iterations" | "N_it" => Ok(Self::Iterations),
            "snr" | "snr_db" => Ok(Self::Snr),
            "p_a" | "P_a" => Ok(Self::ActivationProb),
            _ => Err(Error::Config(format!("unknown sweep variable `{s}`"))),
        }
    }
}

/// Parses a comma-separated list of sweep values.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad sweep value `{t}`")))
        })
        .collect()
}

/// Where the `dnn` algorithm gets its weights.
#[derive(Debug, Clone, PartialEq)]
pub enum DnnWeights {
    None,
    /// Path template; `{N_it}` and `{value}` are replaced per sweep point.
    File(String),
    /// Train one network per sweep point and store it in `dir`.
    Train { settings: TrainingSettings, dir: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SystemConfig,
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub samples: usize,
    pub weights: DnnWeights,
    pub output: Option<PathBuf>,
    pub master_seed: u64,
    /// Fill `wall_time_ms`; off by default so reruns are byte-identical.
    pub record_time: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms requested".into()));
        }
        if self.algorithms.contains(&Algorithm::Dnn) && self.weights == DnnWeights::None {
            return Err(Error::Config("dnn requested without a weight file or training plan".into()));
        }
        Ok(())
    }
}

/// Aggregate metrics of one algorithm at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    /// Mean NMSE over samples with at least one active user.
    pub nmse: f64,
    pub nmse_std_error: f64,
    /// Samples entering the NMSE mean.
    pub nmse_samples: usize,
    /// `(missed + false alarms) / (K samples)`.
    pub uad_error_rate: f64,
    pub missed: usize,
    pub false_alarms: usize,
    pub samples: usize,
    pub wall_time_ms: u64,
}

impl MetricsRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{:e},{:e},{},{}",
            self.sweep_value, self.algorithm, self.nmse, self.uad_error_rate, self.samples, self.wall_time_ms
        )
    }
}

pub fn to_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Detection and channel estimate of one algorithm on one sample.
fn estimate(
    algorithm: Algorithm,
    sc: &Scenario,
    s: &SampleRealization,
    bank: Option<&WeightBank>,
) -> Result<(Vec<Complex64>, Vec<bool>)> {
    let meas = &sc.measurement;
    Ok(match algorithm {
        Algorithm::MpBsbl => {
            let d = run_mp_bsbl(sc, &s.y)?;
            (d.h_hat, d.active)
        }
        Algorithm::Dnn => {
            let bank = bank.ok_or_else(|| Error::Config("dnn requested without weights".into()))?;
            let d = run_network(bank, sc, &s.y)?;
            (d.h_hat, d.active)
        }
        Algorithm::GaMmse => (ga_mmse(meas, &s.y, &s.active_users(), s.sigma_w2)?, s.alpha.clone()),
        Algorithm::Bomp => {
            let k_plus = s.alpha.iter().filter(|&&a| a).count();
            if k_plus == 0 {
                (vec![Complex64::new(0.0, 0.0); meas.cols()], vec![false; meas.users()])
            } else {
                let r = bomp(meas, &s.y, k_plus)?;
                let active = r.active(meas.users());
                (r.h_hat, active)
            }
        }
    })
}

struct SampleOutcome {
    nmse: Option<f64>,
    uad: UadErrors,
    nanos: u128,
}

/// Evaluates every algorithm on `samples`; samples run in parallel and the
/// per-sample results are reduced in sample order.
pub fn evaluate(
    sc: &Scenario,
    samples: &[SampleRealization],
    algorithms: &[Algorithm],
    bank: Option<&WeightBank>,
    sweep_value: f64,
    record_time: bool,
) -> Result<Vec<MetricsRecord>> {
    if let Some(b) = bank {
        b.ensure_fits(&sc.measurement, sc.config.iterations)
            .map_err(|e| Error::IncompatibleWeights(e.to_string()))?;
    }
    let outcomes: Vec<Vec<SampleOutcome>> = samples
        .par_iter()
        .map(|s| {
            algorithms
                .iter()
                .map(|&a| {
                    let t = Instant::now();
                    let (h_hat, active) = estimate(a, sc, s, bank)?;
                    Ok(SampleOutcome {
                        nmse: nmse(&h_hat, &s.h_bar),
                        uad: UadErrors::count(&active, &s.alpha),
                        nanos: t.elapsed().as_nanos(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let users = sc.config.users;
    Ok(algorithms
        .iter()
        .enumerate()
        .map(|(j, &algorithm)| {
            let mut mean = RunningMean::default();
            let (mut missed, mut false_alarms, mut nanos) = (0, 0, 0u128);
            for o in outcomes.iter().map(|v| &v[j]) {
                if let Some(x) = o.nmse {
                    mean.push(x);
                }
                missed += o.uad.missed;
                false_alarms += o.uad.false_alarms;
                nanos += o.nanos;
            }
            MetricsRecord {
                sweep_value,
                algorithm,
                nmse: mean.mean(),
                nmse_std_error: mean.std_error(),
                nmse_samples: mean.count(),
                uad_error_rate: (missed + false_alarms) as f64 / (users * samples.len()).max(1) as f64,
                missed,
                false_alarms,
                samples: samples.len(),
                wall_time_ms: if record_time { (nanos / 1_000_000) as u64 } else { 0 },
            }
        })
        .collect())
}

/// Test samples of sweep point `index`: sample `i` is seeded by
/// `derive_seed(master_seed, index, i)`.
pub fn sweep_samples(sc: &Scenario, master_seed: u64, index: usize, count: usize) -> Vec<SampleRealization> {
    (0..count)
        .map(|i| sc.draw(derive_seed(master_seed, index as u64, i as u64)))
        .collect()
}

fn point_label(value: f64) -> String {
    value.to_string()
}

/// Weight and loss-log paths written for sweep point `value` when training.
pub fn trained_paths(dir: &Path, sweep: SweepVariable, value: f64) -> (PathBuf, PathBuf) {
    let label = format!("{}_{}", sweep.name(), point_label(value));
    (
        dir.join(format!("weights_{label}.txt")),
        dir.join(format!("loss_{label}.csv")),
    )
}

fn weights_for_point(
    spec: &ExperimentSpec,
    sc: &Scenario,
    index: usize,
    value: f64,
    log: &mut dyn FnMut(&str),
) -> Result<Option<WeightBank>> {
    if !spec.algorithms.contains(&Algorithm::Dnn) {
        return Ok(None);
    }
    match &spec.weights {
        DnnWeights::None => Err(Error::Config("dnn requested without weights".into())),
        DnnWeights::File(template) => {
            let path = template
                .replace("{N_it}", &sc.config.iterations.to_string())
                .replace("{value}", &point_label(value));
            Ok(Some(weights_file::load(Path::new(&path), &sc.measurement)?))
        }
        DnnWeights::Train { settings, dir } => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let mut bank = WeightBank::ones(&sc.measurement, sc.config.iterations);
            let seed = derive_seed(spec.master_seed, TRAIN_STREAM + index as u64, 0);
            let report = train_on_fresh_data(&mut bank, sc, settings, seed, |epoch, loss| {
                log(&format!("{}={value}: epoch {epoch} mean loss {loss:.6e}", spec.sweep.name()))
            })?;
            let (wpath, lpath) = trained_paths(dir, spec.sweep, value);
            weights_file::save(&bank, &sc.measurement, &wpath)?;
            save_loss_log(&report, &lpath)?;
            Ok(Some(bank))
        }
    }
}

/// Runs the whole sweep, writing the CSV when `spec.output` is set.
pub fn run_experiment(spec: &ExperimentSpec, log: &mut dyn FnMut(&str)) -> Result<Vec<MetricsRecord>> {
    spec.validate()?;
    let mut records = Vec::new();
    for (index, &value) in spec.values.iter().enumerate() {
        let cfg = spec.sweep.apply(&spec.base, value)?;
        let sc = Scenario::generate(&cfg)?;
        let bank = weights_for_point(spec, &sc, index, value, log)?;
        let samples = sweep_samples(&sc, spec.master_seed, index, spec.samples);
        let point = evaluate(&sc, &samples, &spec.algorithms, bank.as_ref(), value, spec.record_time)?;
        for r in &point {
            log(&format!(
                "{}={value} {}: nmse {:.4e} uad {:.4e}",
                spec.sweep.name(),
                r.algorithm,
                r.nmse,
                r.uad_error_rate
            ));
        }
        records.extend(point);
    }
    if let Some(path) = &spec.output {
        std::fs::write(path, to_csv(&records)).map_err(|e| Error::io(path, e))?;
    }
    Ok(records)
}
