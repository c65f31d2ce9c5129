//! All-ones network against plain MP-BSBL, iteration by iteration.

mod common;

use common::toy_scenario;
use nora_core::mp_bsbl::{run_traced, IterationState};
use nora_core::rng::derive_seed;
use nora_core::unrolled::{forward, run_network, WeightBank};
use nora_core::{mp_bsbl, Complex64, Scenario, SystemConfig};

fn max_rel_real(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs() / scale))
}

fn max_rel_complex(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.norm())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm() / scale))
}

fn state_error(a: &IterationState, b: &IterationState) -> f64 {
    [
        max_rel_real(&a.v_q, &b.v_q),
        max_rel_complex(&a.m_q, &b.m_q),
        max_rel_real(&a.v_h, &b.v_h),
        max_rel_complex(&a.m_h, &b.m_h),
        max_rel_real(&a.v_dz, &b.v_dz),
        max_rel_complex(&a.m_dz, &b.m_dz),
        max_rel_real(&a.v_z, &b.v_z),
        max_rel_complex(&a.m_z, &b.m_z),
        max_rel_real(&a.gamma, &b.gamma),
        (a.lambda - b.lambda).abs() / b.lambda.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn check(sc: &Scenario, sample_seed: u64, iterations: usize) -> f64 {
    let s = sc.draw(sample_seed);
    let reference = run_traced(sc, &s.y, iterations).unwrap();
    let bank = WeightBank::ones(&sc.measurement, iterations);
    let pass = forward(&bank, &s.y, &sc.measurement, &sc.config).unwrap();
    pass.states()
        .iter()
        .zip(&reference[1..])
        .map(|(a, b)| {
            assert_eq!(a.iteration, b.iteration);
            state_error(a, b)
        })
        .fold(0.0, f64::max)
}

#[test]
fn all_ones_network_reproduces_mp_bsbl() {
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let sc = toy_scenario(i);
        worst = worst.max(check(&sc, derive_seed(i, 9, 0), 20));
    }
    let base = Scenario::generate(&SystemConfig::table_iv()).unwrap();
    for i in 0..50 {
        let mut cfg = SystemConfig::table_iv();
        cfg.snr_db = [5.0, 10.0, 15.0, 20.0][i as usize % 4];
        let sc = Scenario { config: cfg, ..base.clone() };
        worst = worst.max(check(&sc, derive_seed(i, 9, 1), 20));
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn all_ones_detection_matches() {
    let sc = Scenario::generate(&SystemConfig::table_iv()).unwrap();
    let s = sc.draw(77);
    let bank = WeightBank::ones(&sc.measurement, 20);
    assert_eq!(run_network(&bank, &sc, &s.y).unwrap(), mp_bsbl::run_mp_bsbl(&sc, &s.y).unwrap());
}
