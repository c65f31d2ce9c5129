//! Unweighted MP-BSBL: Gaussian message passing for the channel, mean-field
//! updates for the per-user precisions and the noise precision.
//!
//! Every update is a free function over an [`IterationState`] so the weighted
//! network in [`crate::unrolled`] can be checked against it step by step.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::scenario::{EffectiveMeasurement, Scenario};
use crate::{floor, Error, Result, SystemConfig};

/// Initial noise precision.
pub const INITIAL_LAMBDA: f64 = 1e3;

/// All messages of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub v_q: Vec<f64>,
    pub m_q: Vec<Complex64>,
    pub v_h: Vec<f64>,
    pub m_h: Vec<Complex64>,
    /// Messages from the sum node `δ_n` to `z_n`.
    pub v_dz: Vec<f64>,
    pub m_dz: Vec<Complex64>,
    pub v_z: Vec<f64>,
    pub m_z: Vec<Complex64>,
    pub gamma: Vec<f64>,
    pub lambda: f64,
    /// Completed iterations; 0 for the initial state.
    pub iteration: usize,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `λ̂ = 10^3`, `γ̂ = 1`, `v_{δ→z} = 1`, zero means.
///
/// Vectors that are first computed inside an iteration start at unit
/// variance and zero mean.
pub fn init_state(meas: &EffectiveMeasurement) -> IterationState {
    let c = meas.cols();
    let r = meas.rows();
    IterationState {
        v_q: alloc::vec![1.0; c],
        m_q: alloc::vec![ZERO; c],
        v_h: alloc::vec![1.0; c],
        m_h: alloc::vec![ZERO; c],
        v_dz: alloc::vec![1.0; r],
        m_dz: alloc::vec![ZERO; r],
        v_z: alloc::vec![1.0; r],
        m_z: alloc::vec![ZERO; r],
        gamma: alloc::vec![1.0; meas.users()],
        lambda: INITIAL_LAMBDA,
        iteration: 0,
    }
}

fn check(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NumericalDomain(what))
    }
}

/// `1/λ̂ + v_{δ→z}` per row, rejecting non-positive values.
fn row_denominators(state: &IterationState) -> Result<Vec<f64>> {
    let inv_lambda = 1.0 / state.lambda;
    state
        .v_dz
        .iter()
        .map(|&v| {
            let d = inv_lambda + v;
            if d > 0.0 && d.is_finite() {
                Ok(floor(d))
            } else {
                Err(Error::NumericalDomain("1/lambda + v_dz"))
            }
        })
        .collect()
}

/// Product of the incoming sum-node messages at each channel variable.
pub fn update_q(
    state: &IterationState,
    y: &[Complex64],
    meas: &EffectiveMeasurement,
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let den = row_denominators(state)?;
    let mut v_q = Vec::with_capacity(meas.cols());
    let mut m_q = Vec::with_capacity(meas.cols());
    for c in 0..meas.cols() {
        let mut precision = 0.0;
        let mut acc = ZERO;
        for e in meas.col_edges(c) {
            let r = meas.edge_row(e);
            let p = meas.edge_value(e);
            precision += p.norm_sqr() / den[r];
            acc += p.conj() * (y[r] - state.m_dz[r]) / den[r];
        }
        if !(precision > 0.0) {
            return Err(Error::NumericalDomain("v_Q precision"));
        }
        let v = floor(check(1.0 / precision, "v_Q")?);
        v_q.push(v);
        m_q.push(acc * v + state.m_h[c]);
    }
    Ok((v_q, m_q))
}

/// Combines `Q` with the prior message `γ̂_k` of each column's user.
pub fn update_h(
    v_q: &[f64],
    m_q: &[Complex64],
    gamma_prev: &[f64],
    meas: &EffectiveMeasurement,
) -> (Vec<f64>, Vec<Complex64>) {
    let mut v_h = Vec::with_capacity(v_q.len());
    let mut m_h = Vec::with_capacity(v_q.len());
    for c in 0..v_q.len() {
        let g = gamma_prev[meas.col_user(c)];
        v_h.push(floor(1.0 / (1.0 / v_q[c] + g)));
        m_h.push(m_q[c] / floor(1.0 + v_q[c] * g));
    }
    (v_h, m_h)
}

/// Mean-field precision update per user.
pub fn update_gamma(v_h: &[f64], m_h: &[Complex64], cfg: &SystemConfig) -> Vec<f64> {
    let dc = cfg.spreading_degree;
    let numerator = cfg.prior_a + dc as f64 + 1.0;
    (0..v_h.len() / dc)
        .map(|k| {
            let power: f64 = (k * dc..(k + 1) * dc)
                .map(|c| m_h[c].norm_sqr() + v_h[c])
                .sum();
            numerator / floor(cfg.prior_b + power)
        })
        .collect()
}

/// Messages from each sum node `δ_n` to its auxiliary variable `z_n`.
///
/// `state` supplies the previous iteration's `λ̂` and `δ→z` messages.
pub fn update_delta_to_z(
    state: &IterationState,
    v_h: &[f64],
    m_h: &[Complex64],
    y: &[Complex64],
    meas: &EffectiveMeasurement,
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let den = row_denominators(state)?;
    let mut v_dz = Vec::with_capacity(meas.rows());
    let mut m_dz = Vec::with_capacity(meas.rows());
    for r in 0..meas.rows() {
        let mut v = 0.0;
        let mut m = ZERO;
        for &e in meas.row_edges(r) {
            let c = meas.edge_col(e);
            let p = meas.edge_value(e);
            v += p.norm_sqr() * v_h[c];
            m += p * m_h[c];
        }
        let v = floor(v);
        m -= (y[r] - state.m_dz[r]) * (v / den[r]);
        v_dz.push(v);
        m_dz.push(m);
    }
    Ok((v_dz, m_dz))
}

/// Posterior of `z_n` combining the sum-node message with the likelihood.
pub fn update_z(
    v_dz: &[f64],
    m_dz: &[Complex64],
    lambda_prev: f64,
    y: &[Complex64],
) -> (Vec<f64>, Vec<Complex64>) {
    let mut v_z = Vec::with_capacity(v_dz.len());
    let mut m_z = Vec::with_capacity(v_dz.len());
    for r in 0..v_dz.len() {
        let v = floor(1.0 / (lambda_prev + 1.0 / v_dz[r]));
        v_z.push(v);
        m_z.push((y[r] * lambda_prev + m_dz[r] / v_dz[r]) * v);
    }
    (v_z, m_z)
}

/// Mean-field noise precision update; `|·|²` is the squared modulus.
pub fn update_lambda(v_z: &[f64], m_z: &[Complex64], y: &[Complex64]) -> f64 {
    let residual: f64 = m_z
        .iter()
        .zip(y)
        .zip(v_z)
        .map(|((m, y), v)| (m - y).norm_sqr() + v)
        .sum();
    y.len() as f64 / floor(residual)
}

/// One full iteration in the fixed order Q → h̄ → γ̂ → δ→z → z → λ̂.
pub fn iterate(
    state: &IterationState,
    y: &[Complex64],
    meas: &EffectiveMeasurement,
    cfg: &SystemConfig,
) -> Result<IterationState> {
    let (v_q, m_q) = update_q(state, y, meas)?;
    let (v_h, m_h) = update_h(&v_q, &m_q, &state.gamma, meas);
    let gamma = update_gamma(&v_h, &m_h, cfg);
    let (v_dz, m_dz) = update_delta_to_z(state, &v_h, &m_h, y, meas)?;
    let (v_z, m_z) = update_z(&v_dz, &m_dz, state.lambda, y);
    let lambda = check(update_lambda(&v_z, &m_z, y), "lambda")?;
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::NumericalDomain("gamma"));
    }
    Ok(IterationState {
        v_q,
        m_q,
        v_h,
        m_h,
        v_dz,
        m_dz,
        v_z,
        m_z,
        gamma,
        lambda,
        iteration: state.iteration + 1,
    })
}

/// `1/γ̂_k > γ_th` marks user `k` active.
pub fn detect_active(gamma: &[f64], gamma_th: f64) -> Vec<bool> {
    gamma.iter().map(|&g| 1.0 / g > gamma_th).collect()
}

/// Channel estimate with the blocks of undetected users zeroed.
pub fn gate_estimate(m_h: &[Complex64], active: &[bool], degree: usize) -> Vec<Complex64> {
    m_h.iter()
        .enumerate()
        .map(|(c, &m)| if active[c / degree] { m } else { ZERO })
        .collect()
}

/// Result of a full detection/estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Channel estimate, zero outside the detected set.
    pub h_hat: Vec<Complex64>,
    pub gamma: Vec<f64>,
    pub active: Vec<bool>,
}

impl Detection {
    pub fn from_posterior(m_h: &[Complex64], gamma: Vec<f64>, cfg: &SystemConfig) -> Self {
        let active = detect_active(&gamma, cfg.gamma_th);
        let h_hat = gate_estimate(m_h, &active, cfg.spreading_degree);
        Self {
            h_hat,
            gamma,
            active,
        }
    }

    pub fn active_set(&self) -> Vec<usize> {
        self.active
            .iter()
            .enumerate()
            .filter_map(|(k, &a)| a.then_some(k))
            .collect()
    }
}

/// Runs `cfg.iterations` iterations and returns every intermediate state
/// (index 0 is the initial state).
pub fn run_traced(scenario: &Scenario, y: &[Complex64], iterations: usize) -> Result<Vec<IterationState>> {
    let meas = &scenario.measurement;
    let mut trace = Vec::with_capacity(iterations + 1);
    trace.push(init_state(meas));
    for _ in 0..iterations {
        let next = iterate(trace.last().expect("non-empty"), y, meas, &scenario.config)?;
        trace.push(next);
    }
    Ok(trace)
}

/// MP-BSBL detection and estimation with `scenario.config.iterations` iterations.
pub fn run_mp_bsbl(scenario: &Scenario, y: &[Complex64]) -> Result<Detection> {
    run_mp_bsbl_for(scenario, y, scenario.config.iterations)
}

pub fn run_mp_bsbl_for(scenario: &Scenario, y: &[Complex64], iterations: usize) -> Result<Detection> {
    let meas = &scenario.measurement;
    let mut state = init_state(meas);
    for _ in 0..iterations {
        state = iterate(&state, y, meas, &scenario.config)?;
    }
    Ok(Detection::from_posterior(&state.m_h, state.gamma, &scenario.config))
}
