use std::path::Path;
use std::process::{Command, Output};

fn nora(args: &[&str], dir: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_nora"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn nora");
    assert!(
        out.status.success(),
        "nora {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const SMALL: [&str; 8] = ["--scale", "small", "-q", "--set", "N_it=3", "--set", "snr_db=12", "--set=seed=4"];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(SMALL.iter()).chain(tail).copied().collect()
}

#[test]
fn pipeline_from_scenario_to_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    nora(&with(&["gen-scenario"], &["-o", "scenario.txt"]), d);
    let text = std::fs::read_to_string(d.join("scenario.txt")).unwrap();
    assert!(text.starts_with("nora-scenario v1 K=20 N=8 L_t=11 d_c=4 seed=4"));

    nora(&with(&["gen-data"], &["--size", "30", "--data-seed", "2", "-o", "train.bin"]), d);
    assert_eq!(&std::fs::read(d.join("train.bin")).unwrap()[..5], b"NORA1");

    let train = ["--data", "train.bin", "--set", "epochs=2", "--set", "batch_size=10", "--set", "learning_rate=0.1"];
    nora(&with(&["train"], &[&train[..], &["--loss-log", "loss.csv", "-o", "w.txt"]].concat()), d);
    let weights = std::fs::read_to_string(d.join("w.txt")).unwrap();
    assert!(weights.starts_with("nora-bsbl-weights v1 K=20 N=8 L_t=11 d_c=4 N_it=3"));
    assert_eq!(std::fs::read_to_string(d.join("loss.csv")).unwrap().lines().count(), 3);

    nora(&with(&["train"], &[&train[..], &["--resume", "w.txt", "-o", "w2.txt"]].concat()), d);
    assert_ne!(std::fs::read(d.join("w.txt")).unwrap(), std::fs::read(d.join("w2.txt")).unwrap());

    let out = nora(&with(&["eval"], &["--weights", "w.txt", "--samples", "20"]), d);
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "sweep,algorithm,nmse,uad_error_rate,samples,wall_time_ms");
    let algs: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(algs, ["mp_bsbl", "dnn", "ga_mmse", "bomp"]);
    assert!(lines[1..].iter().all(|l| l.ends_with(",20,0")));
}

#[test]
fn sweep_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.cfg"),
        "# desk run\nK = 20\nN = 8\nL_t = 11\nd_c = 4\nN_it = 4\nsweep = p_a\nvalues = 0.05,0.1\nalgorithms = mp_bsbl,ga_mmse\nsamples = 15\noutput = out.csv\n",
    )
    .unwrap();
    nora(&["sweep", "--config", "run.cfg", "-q"], d);
    let csv = std::fs::read_to_string(d.join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.05,mp_bsbl,"));
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        &["eval", "--scale", "small", "--algorithms", "dnn"][..],
        &["sweep", "--scale", "small", "--sweep", "snr"][..],
        &["sweep", "--scale", "small", "--sweep", "volume", "--values", "1"][..],
        &["eval", "--scale", "small", "--set", "K=abc"][..],
        &["train", "--scale", "small", "--data", "missing.bin", "-o", "w.txt"][..],
    ] {
        let out = Command::new(env!("CARGO_BIN_EXE_nora")).args(args).current_dir(d).output().unwrap();
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}
