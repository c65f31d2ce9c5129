use alloc::vec::Vec;

use crate::scenario::EffectiveMeasurement;
use crate::{Error, Result};

/// The weighting matrices of one iteration block, in layer order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightId {
    // Layer 2
    LambdaToA1v,
    VdzToA1v,
    YToA1m,
    MdzToA1m,
    LambdaToA1m,
    VdzToA1m,
    // Layer 3
    A1vToVq,
    A1mToMq,
    HToQ,
    // Layer 4
    Gamma,
    OneToH,
    VGammaToH,
    // Layer 5
    MhToGamma,
    VhToGamma,
    // Layer 7
    A2vToVdz,
    A2mToMdz,
    YToDelta,
    MdzToMdz,
    VdzToMdz,
    LambdaToDelta,
    // Layer 8
    LambdaToZ,
    VdzToVz,
    YLambdaToZ,
    MvToZ,
    // Layer 9
    MzToLambda,
    YToLambda,
    VzToLambda,
}

/// What one stored weight of a matrix is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// One weight per factor-graph edge (`L_t d_c K`).
    Edge,
    /// One weight per channel entry (`d_c K`).
    Column,
    /// One weight per observation entry (`L_t N`).
    Row,
}

/// Connection pattern of a matrix, expressed over its domain slot `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pattern {
    /// `1 x len`, entry `(0, s)`.
    ScalarRow,
    /// `len x 1`, entry `(s, 0)`.
    ScalarCol,
    /// `R x E`, entry `(row(e), e)`.
    RowToEdge,
    /// `E x C`, entry `(e, col(e))`.
    EdgeToCol,
    /// `E x R`, entry `(e, row(e))`.
    EdgeToRow,
    /// `C x K`, entry `(c, user(c))`.
    ColToUser,
    /// Square diagonal.
    Diagonal,
}

impl WeightId {
    pub const ALL: [WeightId; 27] = [
        WeightId::LambdaToA1v,
        WeightId::VdzToA1v,
        WeightId::YToA1m,
        WeightId::MdzToA1m,
        WeightId::LambdaToA1m,
        WeightId::VdzToA1m,
        WeightId::A1vToVq,
        WeightId::A1mToMq,
        WeightId::HToQ,
        WeightId::Gamma,
        WeightId::OneToH,
        WeightId::VGammaToH,
        WeightId::MhToGamma,
        WeightId::VhToGamma,
        WeightId::A2vToVdz,
        WeightId::A2mToMdz,
        WeightId::YToDelta,
        WeightId::MdzToMdz,
        WeightId::VdzToMdz,
        WeightId::LambdaToDelta,
        WeightId::LambdaToZ,
        WeightId::VdzToVz,
        WeightId::YLambdaToZ,
        WeightId::MvToZ,
        WeightId::MzToLambda,
        WeightId::YToLambda,
        WeightId::VzToLambda,
    ];

    pub const COUNT: usize = 27;

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Name used in weight files.
    pub fn name(self) -> &'static str {
        use WeightId::*;
        match self {
            LambdaToA1v => "lambda->A1v",
            VdzToA1v => "vdelta->A1v",
            YToA1m => "y->A1m",
            MdzToA1m => "mdelta->A1m",
            LambdaToA1m => "lambda->A1m",
            VdzToA1m => "vdelta->A1m",
            A1vToVq => "A1v->vQ",
            A1mToMq => "A1m->mQ",
            HToQ => "h->Q",
            Gamma => "gamma",
            OneToH => "one->h",
            VGammaToH => "vgamma->h",
            MhToGamma => "mh->gamma",
            VhToGamma => "vh->gamma",
            A2vToVdz => "A2v->vdelta",
            A2mToMdz => "A2m->mdelta",
            YToDelta => "y->delta",
            MdzToMdz => "mdelta->mdelta",
            VdzToMdz => "vdelta->mdelta",
            LambdaToDelta => "lambda->delta",
            LambdaToZ => "lambda->z",
            VdzToVz => "vdelta->vz",
            YLambdaToZ => "ylambda->z",
            MvToZ => "mv->z",
            MzToLambda => "mz->lambda",
            YToLambda => "y->lambda",
            VzToLambda => "vz->lambda",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.name() == name)
    }

    /// Layer (2..=9) the matrix belongs to.
    pub fn layer(self) -> u8 {
        use WeightId::*;
        match self {
            LambdaToA1v | VdzToA1v | YToA1m | MdzToA1m | LambdaToA1m | VdzToA1m => 2,
            A1vToVq | A1mToMq | HToQ => 3,
            Gamma | OneToH | VGammaToH => 4,
            MhToGamma | VhToGamma => 5,
            A2vToVdz | A2mToMdz | YToDelta | MdzToMdz | VdzToMdz | LambdaToDelta => 7,
            LambdaToZ | VdzToVz | YLambdaToZ | MvToZ => 8,
            MzToLambda | YToLambda | VzToLambda => 9,
        }
    }

    /// Matrices held at 1: the weights on the noise-precision and variance
    /// inputs of the first auxiliary layer.
    pub fn is_fixed(self) -> bool {
        use WeightId::*;
        matches!(self, LambdaToA1v | VdzToA1v | LambdaToA1m | VdzToA1m)
    }

    pub fn domain(self) -> Domain {
        use WeightId::*;
        match self {
            LambdaToA1v | VdzToA1v | YToA1m | MdzToA1m | LambdaToA1m | VdzToA1m | A1vToVq
            | A1mToMq | A2vToVdz | A2mToMdz => Domain::Edge,
            HToQ | Gamma | OneToH | VGammaToH | MhToGamma | VhToGamma => Domain::Column,
            YToDelta | MdzToMdz | VdzToMdz | LambdaToDelta | LambdaToZ | VdzToVz | YLambdaToZ
            | MvToZ | MzToLambda | YToLambda | VzToLambda => Domain::Row,
        }
    }

    fn pattern(self) -> Pattern {
        use WeightId::*;
        match self {
            LambdaToA1v | LambdaToA1m | LambdaToDelta | LambdaToZ => Pattern::ScalarRow,
            VzToLambda => Pattern::ScalarCol,
            VdzToA1v | YToA1m | MdzToA1m | VdzToA1m => Pattern::RowToEdge,
            A1vToVq | A1mToMq => Pattern::EdgeToCol,
            A2vToVdz | A2mToMdz => Pattern::EdgeToRow,
            MhToGamma | VhToGamma => Pattern::ColToUser,
            HToQ | Gamma | OneToH | VGammaToH | YToDelta | MdzToMdz | VdzToMdz | VdzToVz
            | YLambdaToZ | MvToZ | MzToLambda | YToLambda => Pattern::Diagonal,
        }
    }
}

/// Number of slots in `domain` for a measurement structure.
pub fn domain_len(domain: Domain, meas: &EffectiveMeasurement) -> usize {
    match domain {
        Domain::Edge => meas.edges(),
        Domain::Column => meas.cols(),
        Domain::Row => meas.rows(),
    }
}

/// Sparsity pattern of one weighting matrix: `(i, j)` is present iff input
/// node `i` feeds output node `j`.
///
/// `pattern[s]` is the matrix position of domain slot `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMask {
    pub id: WeightId,
    pub rows: usize,
    pub cols: usize,
    pub pattern: Vec<(usize, usize)>,
}

impl WeightMask {
    pub fn build(id: WeightId, meas: &EffectiveMeasurement) -> Self {
        let len = domain_len(id.domain(), meas);
        let (rows, cols) = match id.pattern() {
            Pattern::ScalarRow => (1, len),
            Pattern::ScalarCol => (len, 1),
            Pattern::RowToEdge => (meas.rows(), meas.edges()),
            Pattern::EdgeToCol => (meas.edges(), meas.cols()),
            Pattern::EdgeToRow => (meas.edges(), meas.rows()),
            Pattern::ColToUser => (meas.cols(), meas.users()),
            Pattern::Diagonal => (len, len),
        };
        let pattern = (0..len)
            .map(|s| match id.pattern() {
                Pattern::ScalarRow => (0, s),
                Pattern::ScalarCol => (s, 0),
                Pattern::RowToEdge => (meas.edge_row(s), s),
                Pattern::EdgeToCol => (s, meas.edge_col(s)),
                Pattern::EdgeToRow => (s, meas.edge_row(s)),
                Pattern::ColToUser => (s, meas.col_user(s)),
                Pattern::Diagonal => (s, s),
            })
            .collect();
        Self {
            id,
            rows,
            cols,
            pattern,
        }
    }

    pub fn nnz(&self) -> usize {
        self.pattern.len()
    }

    /// Domain slot holding position `(i, j)`, if it is on the pattern.
    pub fn slot_of(&self, i: usize, j: usize) -> Option<usize> {
        match self.id.pattern() {
            Pattern::ScalarRow => (i == 0 && j < self.cols).then_some(j),
            Pattern::ScalarCol => (j == 0 && i < self.rows).then_some(i),
            Pattern::RowToEdge => (j < self.cols && self.pattern[j].0 == i).then_some(j),
            Pattern::EdgeToCol | Pattern::EdgeToRow | Pattern::ColToUser => {
                (i < self.rows && self.pattern[i].1 == j).then_some(i)
            }
            Pattern::Diagonal => (i == j && i < self.rows).then_some(i),
        }
    }

    /// Dense row-major `rows × cols` matrix with `values[s]` at slot `s` and
    /// zeros off the pattern.
    pub fn densify(&self, values: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.rows * self.cols];
        for (&(i, j), &v) in self.pattern.iter().zip(values) {
            out[i * self.cols + j] = v;
        }
        out
    }

    /// Slots in row-major order of their matrix positions.
    pub fn row_major_slots(&self) -> Vec<usize> {
        let mut slots: Vec<usize> = (0..self.nnz()).collect();
        slots.sort_by_key(|&s| self.pattern[s]);
        slots
    }
}

/// All 27 masks of one iteration block (identical across blocks).
pub fn build_masks(meas: &EffectiveMeasurement) -> Vec<WeightMask> {
    WeightId::ALL.iter().map(|&id| WeightMask::build(id, meas)).collect()
}

/// Dimensions a bank was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BankDims {
    pub users: usize,
    pub subcarriers: usize,
    pub pilot_len: usize,
    pub degree: usize,
    pub blocks: usize,
}

impl BankDims {
    pub fn of(meas: &EffectiveMeasurement, blocks: usize) -> Self {
        Self {
            users: meas.users(),
            subcarriers: meas.subcarriers(),
            pilot_len: meas.pilot_len(),
            degree: meas.degree(),
            blocks,
        }
    }

    fn len(&self, domain: Domain) -> usize {
        match domain {
            Domain::Edge => self.pilot_len * self.degree * self.users,
            Domain::Column => self.degree * self.users,
            Domain::Row => self.pilot_len * self.subcarriers,
        }
    }

    /// Checks that a bank with these dimensions fits `other`.
    pub fn ensure_matches(&self, other: &BankDims) -> Result<()> {
        let pairs = [
            ("K", self.users, other.users),
            ("N", self.subcarriers, other.subcarriers),
            ("L_t", self.pilot_len, other.pilot_len),
            ("d_c", self.degree, other.degree),
            ("N_it", self.blocks, other.blocks),
        ];
        for (what, expected, found) in pairs {
            if expected != found {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    found,
                });
            }
        }
        Ok(())
    }
}

/// Offsets of each matrix inside one block's flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    offsets: [usize; WeightId::COUNT + 1],
}

impl Layout {
    pub fn new(dims: &BankDims) -> Self {
        let mut offsets = [0; WeightId::COUNT + 1];
        for id in WeightId::ALL {
            offsets[id.index() + 1] = offsets[id.index()] + dims.len(id.domain());
        }
        Self { offsets }
    }

    #[inline]
    pub fn range(&self, id: WeightId) -> core::ops::Range<usize> {
        self.offsets[id.index()]..self.offsets[id.index() + 1]
    }

    /// Parameters per block.
    pub fn block_len(&self) -> usize {
        self.offsets[WeightId::COUNT]
    }
}

/// Every weighting matrix of every iteration block, stored as the values on
/// each matrix's pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightBank {
    dims: BankDims,
    layout: Layout,
    values: Vec<f64>,
}

impl WeightBank {
    /// All pattern weights 1: the network then reproduces MP-BSBL.
    pub fn ones(meas: &EffectiveMeasurement, blocks: usize) -> Self {
        Self::filled(BankDims::of(meas, blocks), 1.0)
    }

    pub fn filled(dims: BankDims, value: f64) -> Self {
        let layout = Layout::new(&dims);
        let values = alloc::vec![value; layout.block_len() * dims.blocks];
        let mut bank = Self {
            dims,
            layout,
            values,
        };
        bank.reset_fixed();
        bank
    }

    pub fn dims(&self) -> &BankDims {
        &self.dims
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn blocks(&self) -> usize {
        self.dims.blocks
    }

    /// Flat view of every parameter, block-major.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// All matrices of block `l` (0-based).
    #[inline]
    pub fn block(&self, l: usize) -> BlockWeights<'_> {
        let n = self.layout.block_len();
        BlockWeights {
            layout: &self.layout,
            values: &self.values[l * n..(l + 1) * n],
        }
    }

    #[inline]
    pub fn get(&self, l: usize, id: WeightId) -> &[f64] {
        let base = l * self.layout.block_len();
        let r = self.layout.range(id);
        &self.values[base + r.start..base + r.end]
    }

    #[inline]
    pub fn get_mut(&mut self, l: usize, id: WeightId) -> &mut [f64] {
        let base = l * self.layout.block_len();
        let r = self.layout.range(id);
        &mut self.values[base + r.start..base + r.end]
    }

    /// Restores every fixed matrix to 1.
    pub fn reset_fixed(&mut self) {
        for l in 0..self.blocks() {
            for id in WeightId::ALL.into_iter().filter(|id| id.is_fixed()) {
                self.get_mut(l, id).fill(1.0);
            }
        }
    }

    /// Sets every trainable weight to 1.
    pub fn reset_trainable(&mut self) {
        for l in 0..self.blocks() {
            for id in WeightId::ALL.into_iter().filter(|id| !id.is_fixed()) {
                self.get_mut(l, id).fill(1.0);
            }
        }
    }

    /// Flat mask over [`as_slice`](Self::as_slice): true where the
    /// parameter is trainable.
    pub fn trainable_mask(&self) -> Vec<bool> {
        let mut mask = alloc::vec![false; self.values.len()];
        for l in 0..self.blocks() {
            let base = l * self.layout.block_len();
            for id in WeightId::ALL.into_iter().filter(|id| !id.is_fixed()) {
                let r = self.layout.range(id);
                mask[base + r.start..base + r.end].fill(true);
            }
        }
        mask
    }

    /// Checks the bank against the measurement structure and block count.
    pub fn ensure_fits(&self, meas: &EffectiveMeasurement, blocks: usize) -> Result<()> {
        BankDims::of(meas, blocks).ensure_matches(&self.dims)
    }
}

/// Borrowed matrices of one block.
#[derive(Clone, Copy)]
pub struct BlockWeights<'a> {
    layout: &'a Layout,
    values: &'a [f64],
}

impl<'a> BlockWeights<'a> {
    #[inline]
    pub fn get(&self, id: WeightId) -> &'a [f64] {
        &self.values[self.layout.range(id)]
    }
}
