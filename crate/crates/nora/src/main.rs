use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use nora::config_file::KeyValues;
use nora::experiment::{
    evaluate, parse_algorithms, parse_values, run_experiment, sweep_samples, to_csv, DnnWeights, ExperimentSpec,
};
use nora::training::{save_loss_log, TrainingSettings};
use nora::{dataset, scenario_file, weights_file};
use nora_core::rng::derive_seed;
use nora_core::unrolled::{train, TrainingConfig, WeightBank};
use nora_core::{Scenario, SystemConfig};

#[derive(Parser)]
#[command(name = "nora", version, about = "Joint activity detection and channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the spreading supports and pilot assignment of a scenario.
    GenScenario {
        #[command(flatten)]
        common: Common,
    },
    /// Draw a binary sample set.
    GenData {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        data_seed: u64,
    },
    /// Train an unrolled network and save its weights.
    Train {
        #[command(flatten)]
        common: Common,
        /// Training samples; drawn from --data-seed when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        data_seed: u64,
        /// Continue from an existing weight file instead of all-ones.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long)]
        loss_log: Option<PathBuf>,
    },
    /// Evaluate algorithms at the configured operating point.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Test samples; drawn from --master-seed when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "mp_bsbl,dnn,ga_mmse,bomp")]
        algorithms: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
        #[arg(long)]
        record_time: bool,
    },
    /// Monte-Carlo sweep over iterations, SNR or activation probability.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of iterations, snr, p_a.
        #[arg(long)]
        sweep: Option<String>,
        /// Comma-separated sweep values.
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        algorithms: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        /// Weight file; `{N_it}` and `{value}` are replaced per point.
        #[arg(long)]
        weights: Option<String>,
        /// Train one network per point into this directory instead.
        #[arg(long, conflicts_with = "weights")]
        train_dir: Option<PathBuf>,
        #[arg(long)]
        master_seed: Option<u64>,
        #[arg(long)]
        record_time: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    /// 110 users, 10^5 training samples.
    TableIv,
    /// 20 users, 10^4 training samples.
    Small,
}

#[derive(Args)]
struct Common {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table-iv")]
    scale: Scale,
    /// Extra key=value settings, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, short)]
    quiet: bool,
}

struct Setup {
    kv: KeyValues,
    system: SystemConfig,
    training: TrainingSettings,
}

impl Common {
    fn setup(&self) -> Result<Setup> {
        let mut kv = match &self.config {
            Some(p) => KeyValues::load(p)?,
            None => KeyValues::default(),
        };
        for pair in &self.set {
            kv.set_pair(pair)?;
        }
        let (base, training) = match self.scale {
            Scale::TableIv => (SystemConfig::table_iv(), TrainingSettings::table_iv()),
            Scale::Small => (SystemConfig::small(), TrainingSettings::small()),
        };
        Ok(Setup {
            system: kv.system(&base)?,
            training: training.with_overrides(&kv)?,
            kv,
        })
    }

    fn output(&self, kv: &KeyValues) -> Option<PathBuf> {
        self.output.clone().or_else(|| kv.get("output").map(PathBuf::from))
    }

    fn log(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn required(p: Option<PathBuf>) -> Result<PathBuf> {
    p.context("an output path is required (--output or `output` key)")
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenScenario { common } => {
            let s = common.setup()?;
            let sc = Scenario::generate(&s.system)?;
            let out = required(common.output(&s.kv))?;
            scenario_file::save(&sc, &out)?;
            common.log(&format!("wrote {}", out.display()));
        }
        Command::GenData { common, size, data_seed } => {
            let s = common.setup()?;
            let sc = Scenario::generate(&s.system)?;
            let out = required(common.output(&s.kv))?;
            dataset::save(&dataset::generate(&sc, size, data_seed), &out)?;
            common.log(&format!("wrote {size} samples to {}", out.display()));
        }
        Command::Train {
            common,
            data,
            data_seed,
            resume,
            loss_log,
        } => {
            let s = common.setup()?;
            let sc = Scenario::generate(&s.system)?;
            let out = required(common.output(&s.kv))?;
            let samples = match &data {
                Some(p) => {
                    let ds = dataset::load(p)?;
                    ds.header.ensure_matches(&sc)?;
                    ds.samples
                }
                None => dataset::generate(&sc, s.training.train_set_size, data_seed).samples,
            };
            let mut bank = match &resume {
                Some(p) => weights_file::load(p, &sc.measurement)?,
                None => WeightBank::ones(&sc.measurement, s.system.iterations),
            };
            let tc = TrainingConfig {
                shuffle_seed: derive_seed(data_seed, 3, 0),
                ..s.training.core(0)
            };
            let report = train(&mut bank, &sc, &samples, &tc, |e, l| {
                common.log(&format!("epoch {e}: mean loss {l:.6e}"))
            })?;
            weights_file::save(&bank, &sc.measurement, &out)?;
            if let Some(p) = &loss_log {
                save_loss_log(&report, p)?;
            }
            common.log(&format!("wrote {}", out.display()));
        }
        Command::Eval {
            common,
            weights,
            data,
            algorithms,
            samples,
            master_seed,
            record_time,
        } => {
            let s = common.setup()?;
            let sc = Scenario::generate(&s.system)?;
            let algorithms = parse_algorithms(&algorithms)?;
            let bank = weights
                .as_deref()
                .map(|p| weights_file::load(p, &sc.measurement))
                .transpose()?;
            let test = match &data {
                Some(p) => {
                    let ds = dataset::load(p)?;
                    ds.header.ensure_matches(&sc)?;
                    ds.samples
                }
                None => sweep_samples(&sc, master_seed, 0, samples),
            };
            let records = evaluate(&sc, &test, &algorithms, bank.as_ref(), s.system.iterations as f64, record_time)?;
            emit(&to_csv(&records), common.output(&s.kv).as_deref())?;
        }
        Command::Sweep {
            common,
            sweep,
            values,
            algorithms,
            samples,
            weights,
            train_dir,
            master_seed,
            record_time,
        } => {
            let s = common.setup()?;
            let pick = |flag: Option<String>, key: &str| flag.or_else(|| s.kv.get(key).map(str::to_string));
            let sweep = pick(sweep, "sweep").context("--sweep (or `sweep` key) is required")?;
            let values = pick(values, "values").context("--values (or `values` key) is required")?;
            let algorithms = pick(algorithms, "algorithms").unwrap_or_else(|| "mp_bsbl,ga_mmse,bomp".into());
            let weights = match (pick(weights, "weights"), train_dir) {
                (_, Some(dir)) => DnnWeights::Train {
                    settings: s.training.clone(),
                    dir,
                },
                (Some(w), None) => DnnWeights::File(w),
                (None, None) => DnnWeights::None,
            };
            let spec = ExperimentSpec {
                base: s.system.clone(),
                sweep: sweep.parse()?,
                values: parse_values(&values)?,
                algorithms: parse_algorithms(&algorithms)?,
                samples: match samples {
                    Some(n) => n,
                    None => s.kv.typed("samples")?.unwrap_or(1000),
                },
                weights,
                output: common.output(&s.kv),
                master_seed: match master_seed {
                    Some(m) => m,
                    None => s.kv.typed("master_seed")?.unwrap_or(0),
                },
                record_time,
            };
            let records = run_experiment(&spec, &mut |m| common.log(m))?;
            if spec.output.is_none() {
                print!("{}", to_csv(&records));
            }
        }
    }
    Ok(())
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
