//! Sparse GF(2) matrices and vectors.
//!
//! Parity-check matrices are stored row-major as sorted column-index lists,
//! which is the access pattern of both code constructions and of check-node
//! scheduling in the decoders. Column adjacency is derived on demand.

mod alist;
mod dense;
mod encoder;

pub use alist::{emit_alist, parse_alist};
pub use encoder::Encoder;

pub(crate) use dense::DenseGf2;

use crate::error::{Error, Result};

/// A binary vector stored densely as one byte per position (0 or 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinVector {
    bits: Vec<u8>,
}

impl BinVector {
    pub fn zeros(len: usize) -> Self {
        BinVector { bits: vec![0; len] }
    }

    /// Builds a vector from bytes; anything nonzero counts as a one.
    pub fn from_bits(bits: impl Into<Vec<u8>>) -> Self {
        let mut bits = bits.into();
        for b in bits.iter_mut() {
            *b = (*b != 0) as u8;
        }
        BinVector { bits }
    }

    pub fn from_support(len: usize, support: &[usize]) -> Result<Self> {
        let mut v = BinVector::zeros(len);
        for &i in support {
            if i >= len {
                return Err(Error::Dimension { expected: len, found: i });
            }
            v.bits[i] = 1;
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: u8) {
        self.bits[i] = (bit != 0) as u8;
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.bits[i] ^= 1;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Sorted positions holding a one.
    pub fn support(&self) -> Vec<usize> {
        self.bits.iter().enumerate().filter_map(|(i, &b)| (b != 0).then_some(i)).collect()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn xor(&self, other: &BinVector) -> Result<BinVector> {
        if self.len() != other.len() {
            return Err(Error::Dimension { expected: self.len(), found: other.len() });
        }
        Ok(BinVector { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect() })
    }

    /// Number of positions where the two vectors differ.
    pub fn hamming_distance(&self, other: &BinVector) -> usize {
        assert_eq!(self.len(), other.len());
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }
}

impl From<Vec<u8>> for BinVector {
    fn from(bits: Vec<u8>) -> Self {
        BinVector::from_bits(bits)
    }
}

/// Sparse binary matrix with rows stored as strictly increasing column lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinMatrix {
    n_cols: usize,
    rows: Vec<Vec<usize>>,
}

impl BinMatrix {
    /// Builds a matrix from per-row column lists. Rows are sorted; repeated
    /// or out-of-range column indices are rejected.
    pub fn new(n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut rows = rows;
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidMatrix(format!("row {r} lists column {} twice", w[0])));
            }
            if let Some(&last) = row.last() {
                if last >= n_cols {
                    return Err(Error::InvalidMatrix(format!("row {r} has column {last} >= {n_cols}")));
                }
            }
        }
        Ok(BinMatrix { n_cols, rows })
    }

    /// A matrix with `n_cols` columns and no rows.
    pub fn empty(n_cols: usize) -> Self {
        BinMatrix { n_cols, rows: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        BinMatrix { n_cols: n, rows: (0..n).map(|i| vec![i]).collect() }
    }

    /// Builds a matrix from dense 0/1 rows, all of equal length.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut sparse = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != n_cols {
                return Err(Error::Dimension { expected: n_cols, found: row.len() });
            }
            sparse.push(row.iter().enumerate().filter_map(|(j, &b)| (b != 0).then_some(j)).collect());
        }
        Ok(BinMatrix { n_cols, rows: sparse })
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; self.n_cols];
                for &j in row {
                    dense[j] = 1;
                }
                dense
            })
            .collect()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn n_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Row indices incident to each column, in increasing order.
    pub fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c].push(r);
            }
        }
        cols
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.n_cols];
        for row in &self.rows {
            for &c in row {
                w[c] += 1;
            }
        }
        w
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    /// Stacks `other` below `self`.
    pub fn stack(&self, other: &BinMatrix) -> Result<BinMatrix> {
        if self.n_cols != other.n_cols {
            return Err(Error::Dimension { expected: self.n_cols, found: other.n_cols });
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(BinMatrix { n_cols: self.n_cols, rows })
    }

    pub fn select_rows(&self, indices: &[usize]) -> BinMatrix {
        BinMatrix { n_cols: self.n_cols, rows: indices.iter().map(|&i| self.rows[i].clone()).collect() }
    }

    /// Parity sums of `c` against every row.
    pub fn syndrome(&self, c: &BinVector) -> Result<BinVector> {
        if c.len() != self.n_cols {
            return Err(Error::Dimension { expected: self.n_cols, found: c.len() });
        }
        Ok(BinVector { bits: self.rows.iter().map(|row| row.iter().fold(0u8, |acc, &j| acc ^ c.get(j))).collect() })
    }

    /// True iff every parity check is satisfied by the 0/1 slice `bits`.
    pub fn checks_bits(&self, bits: &[u8]) -> bool {
        debug_assert_eq!(bits.len(), self.n_cols);
        self.rows.iter().all(|row| row.iter().fold(0u8, |acc, &j| acc ^ bits[j]) == 0)
    }

    /// Row rank over GF(2).
    pub fn rank(&self) -> usize {
        DenseGf2::from_sparse(self).rank()
    }

    /// True iff two rows share two or more columns.
    pub fn has_four_cycle(&self) -> bool {
        let cols = self.columns();
        let mut shared = vec![0u32; self.rows.len()];
        let mut touched = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &c in row {
                for &j in &cols[c] {
                    if j <= i {
                        continue;
                    }
                    if shared[j] == 0 {
                        touched.push(j);
                    }
                    shared[j] += 1;
                    if shared[j] >= 2 {
                        return true;
                    }
                }
            }
            for &j in &touched {
                shared[j] = 0;
            }
            touched.clear();
        }
        false
    }
}
