//! Reverse-mode gradients of the final-block channel loss.
//!
//! Complex intermediates carry adjoints `∂L/∂Re z + i ∂L/∂Im z`; with that
//! convention a real weight `w` in `z = w x` receives `Re(conj(z̄) x)`.
//! Values clamped by the variance floor pass no gradient.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::forward::{BlockInput, BlockTrace, ForwardPass};
use super::weights::{Layout, WeightBank, WeightId as W};
use crate::scenario::EffectiveMeasurement;
use crate::{SystemConfig, VARIANCE_FLOOR};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Re(conj(a) b)`.
#[inline]
fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

#[inline]
fn passes(raw: f64) -> bool {
    raw >= VARIANCE_FLOOR
}

/// `‖ĥ − h‖²`, summed over every entry.
pub fn loss(h_hat: &[Complex64], h_true: &[Complex64]) -> f64 {
    h_hat
        .iter()
        .zip(h_true)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum()
}

/// Adjoints of the messages crossing a block boundary.
#[derive(Debug, Clone)]
struct CarryAdjoint {
    lambda: f64,
    v_dz: Vec<f64>,
    m_dz: Vec<Complex64>,
    m_h: Vec<Complex64>,
    gamma: Vec<f64>,
}

impl CarryAdjoint {
    fn zeros(meas: &EffectiveMeasurement) -> Self {
        Self {
            lambda: 0.0,
            v_dz: alloc::vec![0.0; meas.rows()],
            m_dz: alloc::vec![ZERO; meas.rows()],
            m_h: alloc::vec![ZERO; meas.cols()],
            gamma: alloc::vec![0.0; meas.users()],
        }
    }
}

/// Mutable per-matrix gradient view of one block.
struct BlockGrad<'a> {
    layout: &'a Layout,
    values: &'a mut [f64],
}

impl BlockGrad<'_> {
    #[inline]
    fn add(&mut self, id: W, slot: usize, v: f64) {
        let start = self.layout.range(id).start;
        self.values[start + slot] += v;
    }
}

#[allow(clippy::too_many_arguments)]
fn backward_block(
    bank: &WeightBank,
    l: usize,
    grad: &mut BlockGrad<'_>,
    input: BlockInput<'_>,
    t: &BlockTrace,
    y: &[Complex64],
    meas: &EffectiveMeasurement,
    cfg: &SystemConfig,
    out: CarryAdjoint,
) -> CarryAdjoint {
    let w = bank.block(l);
    let rows = meas.rows();
    let cols = meas.cols();
    let lam = input.lambda;
    let inv_lam = 1.0 / lam;
    let mut a_in = CarryAdjoint::zeros(meas);

    let CarryAdjoint {
        lambda: a_lambda,
        v_dz: mut a_vdz,
        m_dz: mut a_mdz,
        m_h: mut a_mh,
        gamma: a_gamma,
    } = out;
    let mut a_vh = alloc::vec![0.0; cols];

    // Layer 9.
    let a_s = if passes(t.s_lambda_raw) {
        -a_lambda * rows as f64 / (t.s_lambda_raw * t.s_lambda_raw)
    } else {
        0.0
    };
    let (w_mzl, w_vzl) = (w.get(W::MzToLambda), w.get(W::VzToLambda));
    let mut a_mz = alloc::vec![ZERO; rows];
    let mut a_vz = alloc::vec![0.0; rows];
    for r in 0..rows {
        let a_u = t.resid[r] * (2.0 * a_s);
        grad.add(W::MzToLambda, r, dot(a_u, t.m_z[r]));
        grad.add(W::YToLambda, r, -dot(a_u, y[r]));
        a_mz[r] = a_u * w_mzl[r];
        a_vz[r] = a_s * w_vzl[r];
        grad.add(W::VzToLambda, r, a_s * t.v_z[r]);
    }

    // Layer 8.
    let (w_lz, w_vvz, w_ylz, w_mvz) = (
        w.get(W::LambdaToZ),
        w.get(W::VdzToVz),
        w.get(W::YLambdaToZ),
        w.get(W::MvToZ),
    );
    for r in 0..rows {
        let v = t.v_dz[r];
        let m = t.m_dz[r];
        a_vz[r] += dot(a_mz[r], t.q_z[r]);
        let a_q = a_mz[r] * t.v_z[r];
        grad.add(W::YLambdaToZ, r, dot(a_q, y[r] * lam));
        a_in.lambda += dot(a_q, y[r]) * w_ylz[r];
        let ratio = m / v;
        grad.add(W::MvToZ, r, dot(a_q, ratio));
        let a_t = a_q * w_mvz[r];
        a_mdz[r] += a_t / v;
        a_vdz[r] -= dot(a_t, ratio) / v;
        if passes(t.v_z_raw[r]) {
            let a_dz = -a_vz[r] * t.v_z_raw[r] * t.v_z_raw[r];
            a_in.lambda += a_dz * w_lz[r];
            grad.add(W::LambdaToZ, r, a_dz * lam);
            grad.add(W::VdzToVz, r, a_dz / v);
            a_vdz[r] -= a_dz * w_vvz[r] / (v * v);
        }
    }

    // Layers 7 and 6.
    let (w_a2v, w_a2m, w_mdd, w_vdm, w_ld) = (
        w.get(W::A2vToVdz),
        w.get(W::A2mToMdz),
        w.get(W::MdzToMdz),
        w.get(W::VdzToMdz),
        w.get(W::LambdaToDelta),
    );
    for r in 0..rows {
        let a_m = a_mdz[r];
        for &e in meas.row_edges(r) {
            let c = meas.edge_col(e);
            let p = meas.edge_value(e);
            grad.add(W::A2mToMdz, e, dot(a_m, p * t.m_h[c]));
            a_mh[c] += p.conj() * (a_m * w_a2m[e]);
        }
        let v = t.v_dz[r];
        let cd_raw = t.corr_den_raw[r];
        let cd = if passes(cd_raw) { cd_raw } else { VARIANCE_FLOOR };
        let cn = t.corr_num[r];
        let a_cn = -a_m * (v / cd);
        a_vdz[r] -= dot(a_m, cn) / cd;
        if passes(cd_raw) {
            let a_cd = dot(a_m, cn) * v / (cd * cd);
            grad.add(W::LambdaToDelta, r, a_cd * inv_lam);
            a_in.lambda -= a_cd * w_ld[r] * inv_lam * inv_lam;
            grad.add(W::VdzToMdz, r, a_cd * input.v_dz[r]);
            a_in.v_dz[r] += a_cd * w_vdm[r];
        }
        grad.add(W::YToDelta, r, dot(a_cn, y[r]));
        grad.add(W::MdzToMdz, r, -dot(a_cn, input.m_dz[r]));
        a_in.m_dz[r] -= a_cn * w_mdd[r];

        if passes(t.v_dz_raw[r]) {
            let a_v = a_vdz[r];
            for &e in meas.row_edges(r) {
                let c = meas.edge_col(e);
                let p2 = meas.edge_value(e).norm_sqr();
                grad.add(W::A2vToVdz, e, a_v * p2 * t.v_h[c]);
                a_vh[c] += a_v * p2 * w_a2v[e];
            }
        }
    }

    // Layer 5.
    let (w_mg, w_vhg) = (w.get(W::MhToGamma), w.get(W::VhToGamma));
    let dc = meas.degree();
    let gamma_num = cfg.prior_a + dc as f64 + 1.0;
    for k in 0..meas.users() {
        let s = t.s_gamma_raw[k];
        if !passes(s) {
            continue;
        }
        let a_s = -a_gamma[k] * gamma_num / (s * s);
        for c in k * dc..(k + 1) * dc {
            grad.add(W::MhToGamma, c, a_s * t.m_h[c].norm_sqr());
            a_mh[c] += t.m_h[c] * (2.0 * a_s * w_mg[c]);
            grad.add(W::VhToGamma, c, a_s * t.v_h[c]);
            a_vh[c] += a_s * w_vhg[c];
        }
    }

    // Layers 4, 3 and 2.
    let (w_g, w_vg, w_hq) = (w.get(W::Gamma), w.get(W::VGammaToH), w.get(W::HToQ));
    let (w_av, w_am) = (w.get(W::A1vToVq), w.get(W::A1mToMq));
    let (w_lv, w_vv, w_m1, w_lm, w_vm) = (
        w.get(W::LambdaToA1v),
        w.get(W::VdzToA1v),
        w.get(W::MdzToA1m),
        w.get(W::LambdaToA1m),
        w.get(W::VdzToA1m),
    );
    for c in 0..cols {
        let k = meas.col_user(c);
        let g = input.gamma[k];
        let vq = t.v_q[c];

        // Layer 4.
        let dmh_raw = t.den_mh_raw[c];
        let dmh = if passes(dmh_raw) { dmh_raw } else { VARIANCE_FLOOR };
        let a_mq = a_mh[c] / dmh;
        let mut a_vq = 0.0;
        if passes(dmh_raw) {
            let a_d = -dot(a_mh[c], t.m_h[c]) / dmh;
            grad.add(W::OneToH, c, a_d);
            a_vq += a_d * g * w_vg[c];
            a_in.gamma[k] += a_d * vq * w_vg[c];
            grad.add(W::VGammaToH, c, a_d * vq * g);
        }
        if passes(t.v_h_raw[c]) {
            let a_d = -a_vh[c] * t.v_h_raw[c] * t.v_h_raw[c];
            a_vq -= a_d / (vq * vq);
            a_in.gamma[k] += a_d * w_g[c];
            grad.add(W::Gamma, c, a_d * g);
        }

        // Layer 3.
        a_vq += dot(a_mq, t.s_m[c]);
        let a_sm = a_mq * vq;
        grad.add(W::HToQ, c, dot(a_mq, input.m_h[c]));
        a_in.m_h[c] += a_mq * w_hq[c];
        let a_sv = if passes(t.v_q_raw[c]) {
            -a_vq * t.v_q_raw[c] * t.v_q_raw[c]
        } else {
            0.0
        };

        // Layer 2 over the column's edges.
        for e in meas.col_edges(c) {
            let r = meas.edge_row(e);
            let p = meas.edge_value(e);
            grad.add(W::A1vToVq, e, a_sv * t.o_a1v[e]);
            grad.add(W::A1mToMq, e, dot(a_sm, t.o_a1m[e]));
            let a_ov = a_sv * w_av[e];
            let a_om = a_sm * w_am[e];

            let dv_raw = t.den_a1v_raw[e];
            if passes(dv_raw) {
                let a_dv = -a_ov * t.o_a1v[e] / dv_raw;
                grad.add(W::LambdaToA1v, e, a_dv * inv_lam);
                a_in.lambda -= a_dv * w_lv[e] * inv_lam * inv_lam;
                grad.add(W::VdzToA1v, e, a_dv * input.v_dz[r]);
                a_in.v_dz[r] += a_dv * w_vv[e];
            }

            let dm_raw = t.den_a1m_raw[e];
            let dm = if passes(dm_raw) { dm_raw } else { VARIANCE_FLOOR };
            let a_num = p * a_om / dm;
            grad.add(W::YToA1m, e, dot(a_num, y[r]));
            grad.add(W::MdzToA1m, e, -dot(a_num, input.m_dz[r]));
            a_in.m_dz[r] -= a_num * w_m1[e];
            if passes(dm_raw) {
                let a_dm = -dot(a_om, t.o_a1m[e]) / dm;
                grad.add(W::LambdaToA1m, e, a_dm * inv_lam);
                a_in.lambda -= a_dm * w_lm[e] * inv_lam * inv_lam;
                grad.add(W::VdzToA1m, e, a_dm * input.v_dz[r]);
                a_in.v_dz[r] += a_dm * w_vm[e];
            }
        }
    }

    a_in
}

/// Adds the gradient of `‖m_h̄ − h_true‖²` with respect to every weight of
/// `bank` into `grad` (same layout as [`WeightBank::as_slice`]) and returns
/// the loss. Entries of fixed matrices are left at zero.
pub fn accumulate_gradient(
    bank: &WeightBank,
    pass: &ForwardPass,
    y: &[Complex64],
    h_true: &[Complex64],
    meas: &EffectiveMeasurement,
    cfg: &SystemConfig,
    grad: &mut [f64],
) -> f64 {
    let h_hat = pass.m_h();
    let value = loss(h_hat, h_true);
    let mut adj = CarryAdjoint::zeros(meas);
    for (a, (m, h)) in adj.m_h.iter_mut().zip(h_hat.iter().zip(h_true)) {
        *a = (m - h) * 2.0;
    }
    let block_len = bank.layout().block_len();
    for l in (0..pass.blocks.len()).rev() {
        let mut g = BlockGrad {
            layout: bank.layout(),
            values: &mut grad[l * block_len..(l + 1) * block_len],
        };
        adj = backward_block(bank, l, &mut g, pass.input_of(l), &pass.blocks[l], y, meas, cfg, adj);
        for id in W::ALL.into_iter().filter(|id| id.is_fixed()) {
            g.values[bank.layout().range(id)].fill(0.0);
        }
    }
    value
}

/// Loss and gradient for a single sample.
pub fn gradient(
    bank: &WeightBank,
    pass: &ForwardPass,
    y: &[Complex64],
    h_true: &[Complex64],
    meas: &EffectiveMeasurement,
    cfg: &SystemConfig,
) -> (f64, Vec<f64>) {
    let mut grad = alloc::vec![0.0; bank.as_slice().len()];
    let value = accumulate_gradient(bank, pass, y, h_true, meas, cfg, &mut grad);
    (value, grad)
}
