mod common;

use common::{random_bank, toy_config, toy_scenario};
use nora_core::mp_bsbl::{detect_active, run_mp_bsbl, run_traced, IterationState};
use nora_core::scenario::{PilotMatrix, SpreadingMatrix};
use nora_core::unrolled::{batch_gradient, forward, sgd_step, WeightBank, WeightId, WeightMask};
use nora_core::{metrics, Complex64, Scenario, SystemConfig};
use proptest::prelude::*;

fn all_positive(s: &IterationState) -> bool {
    s.v_q.iter().chain(&s.v_h).chain(&s.v_dz).chain(&s.v_z).chain(&s.gamma).all(|&v| v > 0.0) && s.lambda > 0.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mp_bsbl_stays_positive(seed in 0u64..10_000, snr in -5.0f64..30.0, p_a in 0.0f64..1.0) {
        let cfg = toy_config(seed);
        let sc = Scenario::with_random_pilots(&SystemConfig { snr_db: snr, activation_prob: p_a, ..cfg }).unwrap();
        let s = sc.draw(seed ^ 0x55);
        for st in run_traced(&sc, &s.y, 20).unwrap() {
            prop_assert!(all_positive(&st), "iteration {}", st.iteration);
        }
    }

    #[test]
    fn weighted_forward_stays_positive(seed in 0u64..10_000, lo in 0.01f64..1.0, span in 0.0f64..1.0) {
        let sc = toy_scenario(seed);
        let s = sc.draw(seed);
        let bank = random_bank(&sc, 6, lo, lo + span.min(2.0 - lo), seed);
        let pass = forward(&bank, &s.y, &sc.measurement, &sc.config).unwrap();
        for st in pass.states() {
            prop_assert!(all_positive(&st), "block {}", st.iteration);
        }
    }

    #[test]
    fn relabeling_users_permutes_the_output(seed in 0u64..10_000, shift in 1usize..8) {
        let sc = toy_scenario(seed);
        let s = sc.draw(seed);
        let k = sc.config.users;
        let dc = sc.config.spreading_degree;
        // New user j is old user perm[j].
        let perm: Vec<usize> = (0..k).map(|j| (j * 3 + shift) % k).collect();
        prop_assume!({ let mut p = perm.clone(); p.sort(); p == (0..k).collect::<Vec<_>>() });
        let supports = perm.iter().map(|&o| sc.spreading.support(o).to_vec()).collect();
        let spreading = SpreadingMatrix::from_supports(sc.config.subcarriers, supports).unwrap();
        let lt = sc.config.pilot_len;
        let mut entries = vec![Complex64::new(0.0, 0.0); lt * k];
        for l in 0..lt {
            for (j, &o) in perm.iter().enumerate() {
                entries[l * k + j] = sc.pilots.get(l, o);
            }
        }
        let pilots = PilotMatrix::from_entries(lt, k, entries).unwrap();
        let relabeled = Scenario::new(sc.config.clone(), spreading, pilots).unwrap();
        let h: Vec<Complex64> = perm.iter().flat_map(|&o| s.h_bar[o * dc..(o + 1) * dc].to_vec()).collect();
        // Same observation up to summation order.
        let y = relabeled.measurement.apply(&h);
        for (a, b) in y.iter().zip(&sc.measurement.apply(&s.h_bar)) {
            prop_assert!((a - b).norm() <= 1e-14 * (1.0 + b.norm()));
        }
        let a = run_traced(&sc, &s.y, 10).unwrap().pop().unwrap();
        let b = run_traced(&relabeled, &s.y, 10).unwrap().pop().unwrap();
        for (j, &o) in perm.iter().enumerate() {
            let rel = (b.gamma[j] - a.gamma[o]).abs() / a.gamma[o];
            prop_assert!(rel <= 1e-9, "gamma {j}: {rel}");
            for d in 0..dc {
                let (x, w) = (b.m_h[j * dc + d], a.m_h[o * dc + d]);
                prop_assert!((x - w).norm() <= 1e-9 * (1.0 + w.norm()));
            }
        }
    }

    #[test]
    fn decisions_are_invariant_to_joint_scaling(inv in prop::collection::vec(1e-6f64..1e3, 1..40), th in 1e-3f64..10.0, e in -20i32..20) {
        let c = 2f64.powi(e);
        let gamma: Vec<f64> = inv.iter().map(|v| 1.0 / v).collect();
        let scaled: Vec<f64> = gamma.iter().map(|g| g / c).collect();
        prop_assert_eq!(detect_active(&gamma, th), detect_active(&scaled, th * c));
    }
}

#[test]
fn threshold_example() {
    assert_eq!(detect_active(&[1.0 / 0.05, 1.0 / 0.5], 0.1), vec![false, true]);
}

#[test]
fn training_respects_masks_and_fixed_weights() {
    let sc = toy_scenario(9);
    let data: Vec<_> = (0..6).map(|i| sc.draw(i)).collect();
    let refs: Vec<_> = data.iter().collect();
    let mut bank = WeightBank::ones(&sc.measurement, 2);
    let mask = bank.trainable_mask();
    for _ in 0..20 {
        let (_, g) = batch_gradient(&bank, &sc, &refs).unwrap();
        sgd_step(&mut bank, &g, 0.05, &mask);
    }
    let mut moved = 0;
    for l in 0..2 {
        for id in WeightId::ALL {
            let m = WeightMask::build(id, &sc.measurement);
            let dense = m.densify(bank.get(l, id));
            for i in 0..m.rows {
                for j in 0..m.cols {
                    let v = dense[i * m.cols + j];
                    match m.slot_of(i, j) {
                        None => assert_eq!(v, 0.0),
                        Some(_) if id.is_fixed() => assert_eq!(v, 1.0),
                        Some(_) => moved += usize::from(v != 1.0),
                    }
                }
            }
        }
    }
    assert!(moved > 100, "{moved}");
}

#[test]
fn zero_observation_keeps_channel_means_at_zero() {
    let sc = toy_scenario(4);
    let y = vec![Complex64::new(0.0, 0.0); sc.measurement.rows()];
    let bank = random_bank(&sc, 5, 0.5, 1.5, 4);
    let pass = forward(&bank, &y, &sc.measurement, &sc.config).unwrap();
    for st in pass.states() {
        assert!(st.m_h.iter().all(|m| m.norm() == 0.0));
    }
}

#[test]
fn silent_users_are_not_detected() {
    let mut cfg = SystemConfig::table_iv();
    cfg.activation_prob = 0.0;
    let sc = Scenario::generate(&cfg).unwrap();
    for seed in 0..5 {
        let s = sc.draw_with_noise(1e-6, seed);
        assert!(run_mp_bsbl(&sc, &s.y).unwrap().active_set().is_empty());
    }
}

#[test]
fn single_noiseless_user_is_recovered() {
    let sc = Scenario::generate(&SystemConfig::table_iv()).unwrap();
    let dc = sc.config.spreading_degree;
    let cols = sc.measurement.cols();
    let a = sc.measurement.dense();
    for k in [0, 37, 109] {
        let mut h = vec![Complex64::new(0.0, 0.0); cols];
        for d in 0..dc {
            h[k * dc + d] = Complex64::new(0.3 + 0.2 * d as f64, 0.9 - 0.4 * d as f64);
        }
        let y = sc.measurement.apply(&h);
        // The user's columns sit on distinct sub-carriers, so LS on its
        // support decouples column by column.
        let mut ls = vec![Complex64::new(0.0, 0.0); cols];
        for j in k * dc..(k + 1) * dc {
            let (num, den) = y.iter().enumerate().fold((Complex64::new(0.0, 0.0), 0.0), |(n, d), (r, yr)| {
                let v = a[r * cols + j];
                (n + v.conj() * yr, d + v.norm_sqr())
            });
            ls[j] = num / den;
        }
        assert!(metrics::nmse(&ls, &h).unwrap() < 1e-28);
        let last = run_traced(&sc, &y, 30).unwrap().pop().unwrap();
        let e = metrics::nmse(&last.m_h, &ls).unwrap();
        assert!(e < 1e-6, "user {k}: {e}");
        let active: Vec<usize> = detect_active(&last.gamma, sc.config.gamma_th)
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
            .collect();
        assert_eq!(active, vec![k]);
    }
}
