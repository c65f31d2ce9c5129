use nora::experiment::{
    evaluate, run_experiment, sweep_samples, to_csv, trained_paths, Algorithm, DnnWeights, ExperimentSpec,
    SweepVariable, CSV_HEADER,
};
use nora::weights_file;
use nora_core::unrolled::WeightBank;
use nora_core::{Scenario, SystemConfig};

fn spec(values: Vec<f64>, algorithms: Vec<Algorithm>) -> ExperimentSpec {
    ExperimentSpec {
        base: SystemConfig { iterations: 5, ..SystemConfig::small() },
        sweep: SweepVariable::Snr,
        values,
        algorithms,
        samples: 60,
        weights: DnnWeights::None,
        output: None,
        master_seed: 17,
        record_time: false,
    }
}

#[test]
fn all_ones_network_reproduces_mp_bsbl_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(vec![3.0, 6.0], vec![Algorithm::MpBsbl, Algorithm::Dnn]);
    s.sweep = SweepVariable::Iterations;
    for n in [3, 6] {
        let sc = Scenario::generate(&SystemConfig { iterations: n, ..s.base.clone() }).unwrap();
        let path = dir.path().join(format!("ones_{n}.txt"));
        weights_file::save(&WeightBank::ones(&sc.measurement, n), &sc.measurement, &path).unwrap();
    }
    s.weights = DnnWeights::File(dir.path().join("ones_{N_it}.txt").display().to_string());
    let records = run_experiment(&s, &mut |_| {}).unwrap();
    assert_eq!(records.len(), 4);
    for pair in records.chunks(2) {
        assert_eq!(pair[0].algorithm, Algorithm::MpBsbl);
        assert_eq!(pair[1].algorithm, Algorithm::Dnn);
        assert_eq!(pair[0].nmse, pair[1].nmse);
        assert_eq!(pair[0].uad_error_rate, pair[1].uad_error_rate);
    }
}

#[test]
fn same_spec_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(vec![5.0, 15.0], vec![Algorithm::MpBsbl, Algorithm::GaMmse, Algorithm::Bomp]);
    let mut texts = Vec::new();
    for name in ["a.csv", "b.csv"] {
        s.output = Some(dir.path().join(name));
        run_experiment(&s, &mut |_| {}).unwrap();
        texts.push(std::fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let text = String::from_utf8(texts.remove(0)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 6);
}

#[test]
fn training_sweep_writes_weights_and_loss_logs() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(vec![10.0], vec![Algorithm::Dnn]);
    s.base.iterations = 2;
    s.samples = 10;
    s.weights = DnnWeights::Train {
        settings: nora::training::TrainingSettings {
            train_set_size: 40,
            test_set_size: 10,
            batch_size: 20,
            epochs: 2,
            learning_rate: 0.1,
        },
        dir: dir.path().to_path_buf(),
    };
    let records = run_experiment(&s, &mut |_| {}).unwrap();
    assert_eq!(records.len(), 1);
    let (w, l) = trained_paths(dir.path(), SweepVariable::Snr, 10.0);
    let sc = Scenario::generate(&SystemConfig { snr_db: 10.0, ..s.base.clone() }).unwrap();
    let bank = weights_file::load(&w, &sc.measurement).unwrap();
    assert_eq!(bank.blocks(), 2);
    let log = std::fs::read_to_string(l).unwrap();
    assert_eq!(log.lines().count(), 3);
}

#[test]
fn missing_weights_and_bad_output_are_errors() {
    let mut s = spec(vec![10.0], vec![Algorithm::Dnn]);
    assert!(run_experiment(&s, &mut |_| {}).is_err());
    s.weights = DnnWeights::File("/nonexistent/weights_{N_it}.txt".into());
    assert!(run_experiment(&s, &mut |_| {}).is_err());

    let dir = tempfile::tempdir().unwrap();
    let sc = Scenario::generate(&SystemConfig { iterations: 3, ..s.base.clone() }).unwrap();
    let path = dir.path().join("three.txt");
    weights_file::save(&WeightBank::ones(&sc.measurement, 3), &sc.measurement, &path).unwrap();
    s.weights = DnnWeights::File(path.display().to_string());
    assert!(run_experiment(&s, &mut |_| {}).is_err(), "block count differs from N_it");

    let mut s = spec(vec![10.0], vec![Algorithm::GaMmse]);
    s.output = Some(dir.path().join("missing-dir").join("out.csv"));
    assert!(run_experiment(&s, &mut |_| {}).is_err());
}

#[test]
fn samples_depend_only_on_seed_point_and_index() {
    let sc = Scenario::generate(&SystemConfig::small()).unwrap();
    let short = sweep_samples(&sc, 5, 1, 4);
    let long = sweep_samples(&sc, 5, 1, 9);
    assert_eq!(short[..], long[..4]);
    let other = sweep_samples(&sc, 5, 2, 4);
    assert_ne!(short[0].y, other[0].y);
}

#[test]
fn ga_mmse_improves_with_snr() {
    let mut means = Vec::new();
    for snr in [5.0, 15.0] {
        let sc = Scenario::generate(&SystemConfig { snr_db: snr, ..SystemConfig::table_iv() }).unwrap();
        let samples = sweep_samples(&sc, 1, 0, 1000);
        let r = evaluate(&sc, &samples, &[Algorithm::GaMmse], None, snr, false).unwrap();
        assert_eq!(r[0].uad_error_rate, 0.0);
        means.push(r[0].nmse);
    }
    assert!(means[1] < means[0], "{means:?}");
}

#[test]
fn uad_error_rate_counts_per_user() {
    let sc = Scenario::generate(&SystemConfig { activation_prob: 0.3, ..SystemConfig::small() }).unwrap();
    let samples = sweep_samples(&sc, 3, 0, 25);
    let r = evaluate(&sc, &samples, &[Algorithm::Bomp, Algorithm::GaMmse], None, 0.0, false).unwrap();
    // BOMP is told the true number of active users, so misses and false
    // alarms pair up.
    assert_eq!(r[0].missed, r[0].false_alarms);
    let expected = (r[0].missed + r[0].false_alarms) as f64 / (sc.config.users * samples.len()) as f64;
    assert_eq!(r[0].uad_error_rate, expected);
    assert!((0.0..=1.0).contains(&r[0].uad_error_rate));
    assert_eq!((r[1].missed, r[1].false_alarms), (0, 0));
    assert!(to_csv(&r).starts_with(CSV_HEADER));
}
