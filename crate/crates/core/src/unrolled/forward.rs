use alloc::vec::Vec;

use num_complex::Complex64;

use super::weights::{BlockWeights, WeightBank, WeightId as W};
use crate::mp_bsbl::{IterationState, INITIAL_LAMBDA};
use crate::scenario::EffectiveMeasurement;
use crate::{floor, Error, Result, SystemConfig};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Messages a block hands to the next one.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCarry {
    pub lambda: f64,
    pub v_dz: Vec<f64>,
    pub m_dz: Vec<Complex64>,
    pub m_h: Vec<Complex64>,
    pub gamma: Vec<f64>,
}

impl BlockCarry {
    /// Initial messages: `λ̂ = 10^3`, `γ̂ = 1`, `v_{δ→z} = 1`, zero means.
    pub fn initial(meas: &EffectiveMeasurement) -> Self {
        Self {
            lambda: INITIAL_LAMBDA,
            v_dz: alloc::vec![1.0; meas.rows()],
            m_dz: alloc::vec![ZERO; meas.rows()],
            m_h: alloc::vec![ZERO; meas.cols()],
            gamma: alloc::vec![1.0; meas.users()],
        }
    }
}

/// Every intermediate of one block, kept for the backward pass.
///
/// `*_raw` fields hold values before the variance floor; the floor is active
/// wherever `raw < VARIANCE_FLOOR`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTrace {
    // Layer 2, per edge
    pub den_a1v_raw: Vec<f64>,
    pub o_a1v: Vec<f64>,
    pub num_a1m: Vec<Complex64>,
    pub den_a1m_raw: Vec<f64>,
    pub o_a1m: Vec<Complex64>,
    // Layer 3, per column
    pub s_v: Vec<f64>,
    pub v_q_raw: Vec<f64>,
    pub v_q: Vec<f64>,
    pub s_m: Vec<Complex64>,
    pub m_q: Vec<Complex64>,
    // Layer 4
    pub den_vh: Vec<f64>,
    pub v_h_raw: Vec<f64>,
    pub v_h: Vec<f64>,
    pub den_mh_raw: Vec<f64>,
    pub m_h: Vec<Complex64>,
    // Layer 5, per user
    pub s_gamma_raw: Vec<f64>,
    pub gamma: Vec<f64>,
    // Layer 7, per row
    pub v_dz_raw: Vec<f64>,
    pub v_dz: Vec<f64>,
    pub corr_num: Vec<Complex64>,
    pub corr_den_raw: Vec<f64>,
    pub m_dz: Vec<Complex64>,
    // Layer 8
    pub den_z: Vec<f64>,
    pub v_z_raw: Vec<f64>,
    pub v_z: Vec<f64>,
    pub q_z: Vec<Complex64>,
    pub m_z: Vec<Complex64>,
    // Layer 9
    pub resid: Vec<Complex64>,
    pub s_lambda_raw: f64,
    pub lambda: f64,
}

impl BlockTrace {
    pub fn carry(&self) -> BlockCarry {
        BlockCarry {
            lambda: self.lambda,
            v_dz: self.v_dz.clone(),
            m_dz: self.m_dz.clone(),
            m_h: self.m_h.clone(),
            gamma: self.gamma.clone(),
        }
    }

    /// The block's messages in [`IterationState`] form.
    pub fn state(&self, iteration: usize) -> IterationState {
        IterationState {
            v_q: self.v_q.clone(),
            m_q: self.m_q.clone(),
            v_h: self.v_h.clone(),
            m_h: self.m_h.clone(),
            v_dz: self.v_dz.clone(),
            m_dz: self.m_dz.clone(),
            v_z: self.v_z.clone(),
            m_z: self.m_z.clone(),
            gamma: self.gamma.clone(),
            lambda: self.lambda,
            iteration,
        }
    }
}

/// Runs one weighted iteration block (layers 2 through 9).
pub fn forward_block(
    w: BlockWeights<'_>,
    input: BlockInput<'_>,
    y: &[Complex64],
    meas: &EffectiveMeasurement,
    cfg: &SystemConfig,
) -> Result<BlockTrace> {
    let edges = meas.edges();
    let cols = meas.cols();
    let rows = meas.rows();
    let lam = input.lambda;
    let inv_lam = 1.0 / lam;

    // Layer 2: auxiliary layer A1, one output per edge.
    let (w_lv, w_vv, w_y1, w_m1, w_lm, w_vm) = (
        w.get(W::LambdaToA1v),
        w.get(W::VdzToA1v),
        w.get(W::YToA1m),
        w.get(W::MdzToA1m),
        w.get(W::LambdaToA1m),
        w.get(W::VdzToA1m),
    );
    let mut den_a1v_raw = Vec::with_capacity(edges);
    let mut o_a1v = Vec::with_capacity(edges);
    let mut num_a1m = Vec::with_capacity(edges);
    let mut den_a1m_raw = Vec::with_capacity(edges);
    let mut o_a1m = Vec::with_capacity(edges);
    for e in 0..edges {
        let r = meas.edge_row(e);
        let p = meas.edge_value(e);
        let dv = inv_lam * w_lv[e] + input.v_dz[r] * w_vv[e];
        let num = y[r] * w_y1[e] - input.m_dz[r] * w_m1[e];
        let dm = inv_lam * w_lm[e] + input.v_dz[r] * w_vm[e];
        den_a1v_raw.push(dv);
        o_a1v.push(p.norm_sqr() / floor(dv));
        num_a1m.push(num);
        den_a1m_raw.push(dm);
        o_a1m.push(p.conj() * num / floor(dm));
    }

    // Layers 3 and 4.
    let (w_av, w_am, w_hq) = (w.get(W::A1vToVq), w.get(W::A1mToMq), w.get(W::HToQ));
    let (w_g, w_one, w_vg) = (w.get(W::Gamma), w.get(W::OneToH), w.get(W::VGammaToH));
    let mut s_v = Vec::with_capacity(cols);
    let mut v_q_raw = Vec::with_capacity(cols);
    let mut v_q = Vec::with_capacity(cols);
    let mut s_m = Vec::with_capacity(cols);
    let mut m_q = Vec::with_capacity(cols);
    let mut den_vh = Vec::with_capacity(cols);
    let mut v_h_raw = Vec::with_capacity(cols);
    let mut v_h = Vec::with_capacity(cols);
    let mut den_mh_raw = Vec::with_capacity(cols);
    let mut m_h = Vec::with_capacity(cols);
    for c in 0..cols {
        let mut sv = 0.0;
        let mut sm = ZERO;
        for e in meas.col_edges(c) {
            sv += o_a1v[e] * w_av[e];
            sm += o_a1m[e] * w_am[e];
        }
        let vq_raw = 1.0 / sv;
        let vq = floor(vq_raw);
        let mq = sm * vq + input.m_h[c] * w_hq[c];
        let g = input.gamma[meas.col_user(c)];
        let dvh = 1.0 / vq + g * w_g[c];
        let vh_raw = 1.0 / dvh;
        let dmh = w_one[c] + vq * g * w_vg[c];
        s_v.push(sv);
        v_q_raw.push(vq_raw);
        v_q.push(vq);
        s_m.push(sm);
        m_q.push(mq);
        den_vh.push(dvh);
        v_h_raw.push(vh_raw);
        v_h.push(floor(vh_raw));
        den_mh_raw.push(dmh);
        m_h.push(mq / floor(dmh));
    }

    // Layer 5: per-user precision.
    let (w_mg, w_vhg) = (w.get(W::MhToGamma), w.get(W::VhToGamma));
    let dc = meas.degree();
    let gamma_num = cfg.prior_a + dc as f64 + 1.0;
    let mut s_gamma_raw = Vec::with_capacity(meas.users());
    let mut gamma = Vec::with_capacity(meas.users());
    for k in 0..meas.users() {
        let power: f64 = (k * dc..(k + 1) * dc)
            .map(|c| m_h[c].norm_sqr() * w_mg[c] + v_h[c] * w_vhg[c])
            .sum();
        let s = cfg.prior_b + power;
        s_gamma_raw.push(s);
        gamma.push(gamma_num / floor(s));
    }

    // Layers 6 to 9.
    let (w_a2v, w_a2m, w_yd, w_mdd, w_vdm, w_ld) = (
        w.get(W::A2vToVdz),
        w.get(W::A2mToMdz),
        w.get(W::YToDelta),
        w.get(W::MdzToMdz),
        w.get(W::VdzToMdz),
        w.get(W::LambdaToDelta),
    );
    let (w_lz, w_vvz, w_ylz, w_mvz) = (
        w.get(W::LambdaToZ),
        w.get(W::VdzToVz),
        w.get(W::YLambdaToZ),
        w.get(W::MvToZ),
    );
    let (w_mzl, w_yl, w_vzl) = (w.get(W::MzToLambda), w.get(W::YToLambda), w.get(W::VzToLambda));
    let mut v_dz_raw = Vec::with_capacity(rows);
    let mut v_dz = Vec::with_capacity(rows);
    let mut corr_num = Vec::with_capacity(rows);
    let mut corr_den_raw = Vec::with_capacity(rows);
    let mut m_dz = Vec::with_capacity(rows);
    let mut den_z = Vec::with_capacity(rows);
    let mut v_z_raw = Vec::with_capacity(rows);
    let mut v_z = Vec::with_capacity(rows);
    let mut q_z = Vec::with_capacity(rows);
    let mut m_z = Vec::with_capacity(rows);
    let mut resid = Vec::with_capacity(rows);
    let mut s_lambda = 0.0;
    for r in 0..rows {
        let mut vraw = 0.0;
        let mut m = ZERO;
        for &e in meas.row_edges(r) {
            let c = meas.edge_col(e);
            let p = meas.edge_value(e);
            vraw += p.norm_sqr() * v_h[c] * w_a2v[e];
            m += p * m_h[c] * w_a2m[e];
        }
        let v = floor(vraw);
        let cn = y[r] * w_yd[r] - input.m_dz[r] * w_mdd[r];
        let cd = inv_lam * w_ld[r] + input.v_dz[r] * w_vdm[r];
        m -= cn * (v / floor(cd));

        let dz = lam * w_lz[r] + w_vvz[r] / v;
        let vz_raw = 1.0 / dz;
        let vz = floor(vz_raw);
        let q = y[r] * lam * w_ylz[r] + m / v * w_mvz[r];
        let mz = q * vz;
        let u = mz * w_mzl[r] - y[r] * w_yl[r];
        s_lambda += u.norm_sqr() + vz * w_vzl[r];

        v_dz_raw.push(vraw);
        v_dz.push(v);
        corr_num.push(cn);
        corr_den_raw.push(cd);
        m_dz.push(m);
        den_z.push(dz);
        v_z_raw.push(vz_raw);
        v_z.push(vz);
        q_z.push(q);
        m_z.push(mz);
        resid.push(u);
    }
    let lambda = rows as f64 / floor(s_lambda);

    if !lambda.is_finite() {
        return Err(Error::NumericalDomain("weighted lambda"));
    }
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::NumericalDomain("weighted gamma"));
    }
    if m_h.iter().any(|m| !(m.re.is_finite() && m.im.is_finite())) {
        return Err(Error::NumericalDomain("weighted m_h"));
    }

    Ok(BlockTrace {
        den_a1v_raw,
        o_a1v,
        num_a1m,
        den_a1m_raw,
        o_a1m,
        s_v,
        v_q_raw,
        v_q,
        s_m,
        m_q,
        den_vh,
        v_h_raw,
        v_h,
        den_mh_raw,
        m_h,
        s_gamma_raw,
        gamma,
        v_dz_raw,
        v_dz,
        corr_num,
        corr_den_raw,
        m_dz,
        den_z,
        v_z_raw,
        v_z,
        q_z,
        m_z,
        resid,
        s_lambda_raw: s_lambda,
        lambda,
    })
}

/// Full forward pass: the initial carry and one trace per block.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub initial: BlockCarry,
    pub blocks: Vec<BlockTrace>,
}

impl ForwardPass {
    /// Final `m_h̄`, the network's channel output.
    pub fn m_h(&self) -> &[Complex64] {
        &self.last().m_h
    }

    pub fn gamma(&self) -> &[f64] {
        &self.last().gamma
    }

    fn last(&self) -> &BlockTrace {
        self.blocks.last().expect("at least one block")
    }

    /// Carry entering block `l`.
    pub fn input_of(&self, l: usize) -> BlockInput<'_> {
        if l == 0 {
            BlockInput::from_carry(&self.initial)
        } else {
            BlockInput::from_trace(&self.blocks[l - 1])
        }
    }

    /// Per-block states, for comparison against MP-BSBL.
    pub fn states(&self) -> Vec<IterationState> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(l, t)| t.state(l + 1))
            .collect()
    }
}

/// Borrowed view of a block's incoming messages.
#[derive(Debug, Clone, Copy)]
pub struct BlockInput<'a> {
    pub lambda: f64,
    pub v_dz: &'a [f64],
    pub m_dz: &'a [Complex64],
    pub m_h: &'a [Complex64],
    pub gamma: &'a [f64],
}

impl<'a> BlockInput<'a> {
    pub fn from_trace(t: &'a BlockTrace) -> Self {
        Self {
            lambda: t.lambda,
            v_dz: &t.v_dz,
            m_dz: &t.m_dz,
            m_h: &t.m_h,
            gamma: &t.gamma,
        }
    }

    pub fn from_carry(c: &'a BlockCarry) -> Self {
        Self {
            lambda: c.lambda,
            v_dz: &c.v_dz,
            m_dz: &c.m_dz,
            m_h: &c.m_h,
            gamma: &c.gamma,
        }
    }
}

/// Runs every block of `bank` on observation `y`.
pub fn forward(
    bank: &WeightBank,
    y: &[Complex64],
    meas: &EffectiveMeasurement,
    cfg: &SystemConfig,
) -> Result<ForwardPass> {
    bank.ensure_fits(meas, bank.blocks())?;
    if y.len() != meas.rows() {
        return Err(Error::DimensionMismatch {
            what: "observation",
            expected: meas.rows(),
            found: y.len(),
        });
    }
    let initial = BlockCarry::initial(meas);
    let mut blocks: Vec<BlockTrace> = Vec::with_capacity(bank.blocks());
    for l in 0..bank.blocks() {
        let trace = {
            let input = match blocks.last() {
                None => BlockInput::from_carry(&initial),
                Some(t) => BlockInput::from_trace(t),
            };
            forward_block(bank.block(l), input, y, meas, cfg)?
        };
        blocks.push(trace);
    }
    Ok(ForwardPass { initial, blocks })
}
