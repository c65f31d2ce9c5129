use alloc::vec::Vec;

use num_complex::Complex64;

use super::{PilotMatrix, SpreadingMatrix};
use crate::{Error, Result};

/// The zero-eliminated measurement matrix `P̄` (`L_t N x d_c K`) in sparse
/// form.
///
/// Rows are indexed `l * N + n` (pilot symbol major, sub-carrier minor) and
/// columns `k * d_c + d` (user major, support position minor), all 0-based.
/// Every non-zero is an *edge* of the factor graph; edges are numbered
/// `column * L_t + l`, i.e. user, then support position, then pilot symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveMeasurement {
    pilot_len: usize,
    subcarriers: usize,
    users: usize,
    degree: usize,
    edge_row: Vec<usize>,
    edge_col: Vec<usize>,
    edge_val: Vec<Complex64>,
    /// CSR over rows: edges of row `r` are `row_edges[row_ptr[r]..row_ptr[r + 1]]`.
    row_ptr: Vec<usize>,
    row_edges: Vec<usize>,
}

impl EffectiveMeasurement {
    /// Forms `P̄` from the pilots and spreading supports.
    ///
    /// Equivalent to `P ⊗ I_N` with the columns of structurally-zero channel
    /// entries removed.
    pub fn build(pilots: &PilotMatrix, spreading: &SpreadingMatrix) -> Result<Self> {
        if pilots.users() != spreading.users() {
            return Err(Error::DimensionMismatch {
                what: "pilot matrix users",
                expected: spreading.users(),
                found: pilots.users(),
            });
        }
        let pilot_len = pilots.len();
        let n = spreading.subcarriers();
        let users = spreading.users();
        let degree = spreading.column_degree();
        let edges = pilot_len * degree * users;
        let mut edge_row = Vec::with_capacity(edges);
        let mut edge_val = Vec::with_capacity(edges);
        for k in 0..users {
            for &sc in spreading.support(k) {
                for l in 0..pilot_len {
                    edge_row.push(l * n + sc);
                    edge_val.push(pilots.get(l, k));
                }
            }
        }
        let rows = pilot_len * n;
        let mut row_ptr = alloc::vec![0usize; rows + 1];
        for &r in &edge_row {
            row_ptr[r + 1] += 1;
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut fill = row_ptr.clone();
        let mut row_edges = alloc::vec![0usize; edges];
        for (e, &r) in edge_row.iter().enumerate() {
            row_edges[fill[r]] = e;
            fill[r] += 1;
        }
        let edge_col = (0..edges).map(|e| e / pilot_len).collect();
        Ok(Self {
            pilot_len,
            subcarriers: n,
            users,
            degree,
            edge_row,
            edge_col,
            edge_val,
            row_ptr,
            row_edges,
        })
    }

    pub fn pilot_len(&self) -> usize {
        self.pilot_len
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// `d_c`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `L_t N`.
    pub fn rows(&self) -> usize {
        self.pilot_len * self.subcarriers
    }

    /// `d_c K`.
    pub fn cols(&self) -> usize {
        self.degree * self.users
    }

    /// `L_t d_c K`.
    pub fn edges(&self) -> usize {
        self.edge_row.len()
    }

    #[inline]
    pub fn row_index(&self, l: usize, n: usize) -> usize {
        l * self.subcarriers + n
    }

    #[inline]
    pub fn col_index(&self, k: usize, d: usize) -> usize {
        k * self.degree + d
    }

    /// User owning column `c`.
    #[inline]
    pub fn col_user(&self, c: usize) -> usize {
        c / self.degree
    }

    #[inline]
    pub fn edge_row(&self, e: usize) -> usize {
        self.edge_row[e]
    }

    #[inline]
    pub fn edge_col(&self, e: usize) -> usize {
        self.edge_col[e]
    }

    /// Value `P̄[edge_row(e), edge_col(e)]`.
    #[inline]
    pub fn edge_value(&self, e: usize) -> Complex64 {
        self.edge_val[e]
    }

    pub fn edge_values(&self) -> &[Complex64] {
        &self.edge_val
    }

    /// Edges of column `c`, one per pilot symbol.
    #[inline]
    pub fn col_edges(&self, c: usize) -> core::ops::Range<usize> {
        c * self.pilot_len..(c + 1) * self.pilot_len
    }

    /// Edges of row `r`, ascending.
    #[inline]
    pub fn row_edges(&self, r: usize) -> &[usize] {
        &self.row_edges[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Entry `(r, c)`.
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.col_edges(c)
            .find(|&e| self.edge_row[e] == r)
            .map_or(Complex64::new(0.0, 0.0), |e| self.edge_val[e])
    }

    /// Dense row-major copy.
    pub fn dense(&self) -> Vec<Complex64> {
        let cols = self.cols();
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.rows() * cols];
        for e in 0..self.edges() {
            out[self.edge_row[e] * cols + self.edge_col(e)] = self.edge_val[e];
        }
        out
    }

    /// `P̄ h`.
    pub fn apply(&self, h: &[Complex64]) -> Vec<Complex64> {
        let mut y = alloc::vec![Complex64::new(0.0, 0.0); self.rows()];
        for (r, out) in y.iter_mut().enumerate() {
            for &e in self.row_edges(r) {
                *out += self.edge_val[e] * h[self.edge_col(e)];
            }
        }
        y
    }

    /// `P̄^H r`.
    pub fn apply_adjoint(&self, r: &[Complex64]) -> Vec<Complex64> {
        (0..self.cols())
            .map(|c| {
                self.col_edges(c)
                    .map(|e| self.edge_val[e].conj() * r[self.edge_row[e]])
                    .sum()
            })
            .collect()
    }
}
