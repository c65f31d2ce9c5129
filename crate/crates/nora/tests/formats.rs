use nora::{dataset, scenario_file, weights_file, Error};
use nora_core::rng::derive_seed;
use nora_core::unrolled::{WeightBank, WeightId};
use nora_core::{Scenario, SystemConfig};

fn small() -> Scenario {
    Scenario::generate(&SystemConfig::small()).unwrap()
}

fn toy() -> Scenario {
    let cfg = SystemConfig {
        users: 8,
        subcarriers: 4,
        pilot_len: 3,
        spreading_degree: 2,
        ..SystemConfig::table_iv()
    };
    Scenario::with_random_pilots(&cfg).unwrap()
}

fn perturbed_bank(sc: &Scenario, blocks: usize) -> WeightBank {
    let mut bank = WeightBank::ones(&sc.measurement, blocks);
    let mask = bank.trainable_mask();
    for (i, (w, t)) in bank.as_mut_slice().iter_mut().zip(mask).enumerate() {
        if t {
            *w = 1.0 + (derive_seed(i as u64, 0, 0) as f64 / u64::MAX as f64 - 0.5) / 3.0;
        }
    }
    bank
}

#[test]
fn scenario_round_trip() {
    for sc in [small(), toy()] {
        let text = scenario_file::to_string(&sc);
        let back = scenario_file::parse(&text, &sc.config).unwrap();
        assert_eq!(back, sc);
    }
    let text = scenario_file::to_string(&small());
    assert!(text.starts_with("nora-scenario v1 K=20 N=8 L_t=11 d_c=4 seed=0\n[supports]\n0: "));
    assert!(text.contains("[pilots]\n0: zc 1 0\n1: zc 1 1\n"));
}

#[test]
fn scenario_rejects_damage() {
    let sc = small();
    let text = scenario_file::to_string(&sc);
    let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    assert!(matches!(scenario_file::parse(&truncated, &sc.config), Err(Error::Parse { .. })));
    let irregular = text.replacen("0: ", "0: 0 ", 1);
    assert!(scenario_file::parse(&irregular, &sc.config).is_err());
}

#[test]
fn weights_round_trip_is_exact() {
    let sc = toy();
    let bank = perturbed_bank(&sc, 3);
    let text = weights_file::to_string(&bank, &sc.measurement).unwrap();
    assert!(text.starts_with("nora-bsbl-weights v1 K=8 N=4 L_t=3 d_c=2 N_it=3\nblock=1 name=lambda->A1v nnz=48\n"));
    let back = weights_file::parse(&text, &sc.measurement).unwrap();
    assert_eq!(back.as_slice(), bank.as_slice());
    assert_eq!(weights_file::to_string(&back, &sc.measurement).unwrap(), text);
}

#[test]
fn weights_records_are_row_major() {
    let sc = toy();
    let bank = WeightBank::ones(&sc.measurement, 1);
    let text = weights_file::to_string(&bank, &sc.measurement).unwrap();
    let mut lines = text.lines().skip_while(|l| !l.contains("name=A2v->vdelta"));
    assert_eq!(lines.next().unwrap(), "block=1 name=A2v->vdelta nnz=48");
    let positions: Vec<(usize, usize)> = lines
        .take(48)
        .map(|l| {
            let mut t = l.split_whitespace().map(|x| x.parse::<usize>().unwrap_or(usize::MAX));
            (t.next().unwrap(), t.next().unwrap())
        })
        .collect();
    let mut sorted = positions.clone();
    sorted.sort();
    assert_eq!(positions, sorted);
}

#[test]
fn weights_reject_truncation_and_mismatch() {
    let sc = toy();
    let bank = perturbed_bank(&sc, 2);
    let text = weights_file::to_string(&bank, &sc.measurement).unwrap();
    let cut = &text[..text.len() / 2];
    assert!(matches!(weights_file::parse(cut, &sc.measurement), Err(Error::Parse { .. })));

    let other = small();
    assert!(matches!(
        weights_file::parse(&text, &other.measurement),
        Err(Error::IncompatibleWeights(_))
    ));

    let name = WeightId::LambdaToA1v.name();
    let tampered = text.replacen(
        &format!("block=1 name={name} nnz=48\n0 0 1.0000000000000000e0"),
        &format!("block=1 name={name} nnz=48\n0 0 2.0000000000000000e0"),
        1,
    );
    assert_ne!(tampered, text);
    assert!(weights_file::parse(&tampered, &sc.measurement).is_err());
}

#[test]
fn dataset_round_trip() {
    let sc = small();
    let ds = dataset::generate(&sc, 5, 42);
    let mut buf = Vec::new();
    dataset::write(&ds, &mut buf).unwrap();
    assert_eq!(&buf[..5], b"NORA1");
    let record = 20 + 16 * (80 + 88) + 8;
    assert_eq!(buf.len(), 5 + 7 * 8 + 5 * record);
    let back = dataset::read(buf.as_slice()).unwrap();
    assert_eq!(back, ds);
}

#[test]
fn empty_dataset_has_a_header() {
    let sc = small();
    let ds = dataset::generate(&sc, 0, 7);
    let mut buf = Vec::new();
    dataset::write(&ds, &mut buf).unwrap();
    assert_eq!(buf.len(), 5 + 7 * 8);
    assert!(dataset::read(buf.as_slice()).unwrap().samples.is_empty());
}

#[test]
fn dataset_seeds_change_only_payload_and_seed_field() {
    let sc = small();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    dataset::write(&dataset::generate(&sc, 3, 1), &mut a).unwrap();
    dataset::write(&dataset::generate(&sc, 3, 2), &mut b).unwrap();
    let header = 5 + 7 * 8;
    assert_eq!(a[..5 + 5 * 8], b[..5 + 5 * 8]);
    assert_ne!(a[5 + 5 * 8..5 + 6 * 8], b[5 + 5 * 8..5 + 6 * 8]);
    assert_eq!(a[5 + 6 * 8..header], b[5 + 6 * 8..header]);
    assert_ne!(a[header..], b[header..]);
}

#[test]
fn dataset_rejects_truncation_and_bad_magic() {
    let sc = small();
    let mut buf = Vec::new();
    dataset::write(&dataset::generate(&sc, 2, 3), &mut buf).unwrap();
    assert!(dataset::read(&buf[..buf.len() - 1]).is_err());
    let mut bad = buf.clone();
    bad[4] = b'2';
    assert!(dataset::read(bad.as_slice()).is_err());
    let mut extra = buf.clone();
    extra.push(0);
    assert!(dataset::read(extra.as_slice()).is_err());
}

#[test]
fn file_helpers_round_trip_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let sc = small();
    let p = dir.path().join("s.txt");
    scenario_file::save(&sc, &p).unwrap();
    assert_eq!(scenario_file::load(&p, &sc.config).unwrap(), sc);
    let d = dir.path().join("d.bin");
    let ds = dataset::generate(&sc, 2, 9);
    dataset::save(&ds, &d).unwrap();
    assert_eq!(dataset::load(&d).unwrap(), ds);
    assert!(matches!(dataset::load(&dir.path().join("missing")), Err(Error::Io { .. })));
}
