//! Genie-aided comparators: linear MMSE with the true activity set and
//! block OMP with the true number of active users.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::{solve_hpd, ColumnMatrix};
use crate::scenario::{EffectiveMeasurement, SampleRealization};
use crate::{Error, Result};

/// Side information handed to the genie baselines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenieInfo {
    pub active_set: Vec<usize>,
    pub k_plus: usize,
}

impl GenieInfo {
    pub fn new(active_set: Vec<usize>) -> Self {
        let k_plus = active_set.len();
        Self { active_set, k_plus }
    }

    pub fn of(sample: &SampleRealization) -> Self {
        Self::new(sample.active_users())
    }
}

/// Dense columns of `P̄` belonging to `users`, in order.
pub fn user_columns(meas: &EffectiveMeasurement, users: &[usize]) -> ColumnMatrix {
    let mut a = ColumnMatrix::new(meas.rows());
    for &k in users {
        for d in 0..meas.degree() {
            let c = meas.col_index(k, d);
            let mut col = alloc::vec![Complex64::new(0.0, 0.0); meas.rows()];
            for e in meas.col_edges(c) {
                col[meas.edge_row(e)] = meas.edge_value(e);
            }
            a.columns.push(col);
        }
    }
    a
}

/// Regularized least squares `(A^H A + ridge I)^{-1} A^H y` on the blocks of
/// `users`, scattered into a full-length `d_c K` vector.
pub fn solve_on_support(
    meas: &EffectiveMeasurement,
    y: &[Complex64],
    users: &[usize],
    ridge: f64,
) -> Result<Vec<Complex64>> {
    check_observation(meas, y)?;
    let a = user_columns(meas, users);
    let n = a.cols();
    let mut g = a.gram();
    for i in 0..n {
        g[i * n + i] += ridge;
    }
    let coef = solve_hpd(&g, n, &a.adjoint_apply(y))?;
    let dc = meas.degree();
    let mut h = alloc::vec![Complex64::new(0.0, 0.0); meas.cols()];
    for (j, &k) in users.iter().enumerate() {
        h[k * dc..(k + 1) * dc].copy_from_slice(&coef[j * dc..(j + 1) * dc]);
    }
    Ok(h)
}

/// Linear MMSE estimate with the true active set and a unit-variance
/// channel prior; zeros outside the set.
pub fn ga_mmse(
    meas: &EffectiveMeasurement,
    y: &[Complex64],
    active_set: &[usize],
    sigma_w2: f64,
) -> Result<Vec<Complex64>> {
    if let Some(&k) = active_set.iter().find(|&&k| k >= meas.users()) {
        return Err(Error::InvalidConfig(alloc::format!("user {k} out of range")));
    }
    solve_on_support(meas, y, active_set, sigma_w2)
}

/// Block OMP output.
#[derive(Debug, Clone, PartialEq)]
pub struct BompResult {
    pub h_hat: Vec<Complex64>,
    /// Users in selection order.
    pub selected: Vec<usize>,
}

impl BompResult {
    pub fn active(&self, users: usize) -> Vec<bool> {
        let mut a = alloc::vec![false; users];
        for &k in &self.selected {
            a[k] = true;
        }
        a
    }
}

/// Greedy block OMP: `k_plus` times, pick the unselected user with the
/// largest `‖P̄_k^H r‖₂` (lowest index on ties), re-fit all selected blocks
/// by least squares and update the residual.
pub fn bomp(meas: &EffectiveMeasurement, y: &[Complex64], k_plus: usize) -> Result<BompResult> {
    check_observation(meas, y)?;
    let users = meas.users();
    if k_plus == 0 || k_plus > users {
        return Err(Error::InvalidConfig(alloc::format!(
            "active user count {k_plus} outside 1..={users}"
        )));
    }
    let dc = meas.degree();
    let mut chosen = alloc::vec![false; users];
    let mut selected = Vec::with_capacity(k_plus);
    let mut residual = y.to_vec();
    let mut h = alloc::vec![Complex64::new(0.0, 0.0); meas.cols()];
    for _ in 0..k_plus {
        let corr = meas.apply_adjoint(&residual);
        let mut best: Option<(usize, f64)> = None;
        for k in (0..users).filter(|&k| !chosen[k]) {
            let score: f64 = corr[k * dc..(k + 1) * dc].iter().map(|c| c.norm_sqr()).sum();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((k, score));
            }
        }
        let (k, _) = best.expect("an unselected user remains");
        chosen[k] = true;
        selected.push(k);
        h = solve_on_support(meas, y, &selected, 0.0)?;
        let fit = meas.apply(&h);
        for (r, (yy, f)) in residual.iter_mut().zip(y.iter().zip(&fit)) {
            *r = yy - f;
        }
    }
    Ok(BompResult { h_hat: h, selected })
}

fn check_observation(meas: &EffectiveMeasurement, y: &[Complex64]) -> Result<()> {
    if y.len() != meas.rows() {
        return Err(Error::DimensionMismatch {
            what: "observation",
            expected: meas.rows(),
            found: y.len(),
        });
    }
    Ok(())
}
