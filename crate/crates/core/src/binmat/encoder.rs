use rand::Rng;

use super::dense::{bit, set_bit, DenseGf2};
use super::{BinMatrix, BinVector};
use crate::error::{Error, Result};

/// Systematic encoder derived from a parity-check matrix by Gauss-Jordan
/// elimination.
///
/// Information bits occupy the non-pivot ("free") columns of the reduced
/// echelon form; each pivot column carries the parity of a fixed subset of
/// the information bits. Rank-deficient matrices are handled by dropping the
/// dependent rows, so `k() == n() - rank(H)` always.
#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    free: Vec<usize>,
    pivots: Vec<usize>,
    // parity_masks[i] has bit k set when info bit k feeds pivot column i
    parity_masks: Vec<Vec<u64>>,
    nominal_rows: usize,
}

impl Encoder {
    pub fn new(h: &BinMatrix) -> Self {
        let n = h.n_cols();
        let ech = DenseGf2::from_sparse(h).echelon();
        let mut is_pivot = vec![false; n];
        for &p in &ech.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
        let words = free.len().div_ceil(64);
        let parity_masks = ech
            .rows
            .iter()
            .map(|row| {
                let mut mask = vec![0u64; words];
                for (k, &f) in free.iter().enumerate() {
                    if bit(row, f) {
                        set_bit(&mut mask, k);
                    }
                }
                mask
            })
            .collect();
        Encoder { n, free, pivots: ech.pivots, parity_masks, nominal_rows: h.n_rows() }
    }

    /// Codeword length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of information bits.
    pub fn k(&self) -> usize {
        self.free.len()
    }

    /// GF(2) rank of the source parity-check matrix.
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Rate from the rank, `k / n`.
    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    /// Rate implied by the row count alone, `1 - rows / n`.
    pub fn nominal_rate(&self) -> f64 {
        1.0 - self.nominal_rows as f64 / self.n as f64
    }

    /// Positions of the information bits inside a codeword.
    pub fn info_positions(&self) -> &[usize] {
        &self.free
    }

    /// Column order that puts information bits first and parity bits last.
    pub fn column_permutation(&self) -> Vec<usize> {
        self.free.iter().chain(&self.pivots).copied().collect()
    }

    pub fn encode(&self, info: &[u8]) -> Result<BinVector> {
        if info.len() != self.k() {
            return Err(Error::Dimension { expected: self.k(), found: info.len() });
        }
        let mut packed = vec![0u64; self.k().div_ceil(64)];
        for (k, &b) in info.iter().enumerate() {
            if b != 0 {
                set_bit(&mut packed, k);
            }
        }
        let mut c = vec![0u8; self.n];
        for (&pos, &b) in self.free.iter().zip(info) {
            c[pos] = (b != 0) as u8;
        }
        for (&pos, mask) in self.pivots.iter().zip(&self.parity_masks) {
            let ones: u32 = mask.iter().zip(&packed).map(|(m, u)| (m & u).count_ones()).sum();
            c[pos] = (ones & 1) as u8;
        }
        Ok(BinVector::from_bits(c))
    }

    /// Reads the information bits back out of a (possibly erroneous) word.
    pub fn extract(&self, c: &BinVector) -> Vec<u8> {
        self.free.iter().map(|&j| c.get(j)).collect()
    }

    /// Draws uniformly random information bits and encodes them.
    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<u8>, BinVector) {
        let info: Vec<u8> = (0..self.k()).map(|_| rng.random::<bool>() as u8).collect();
        let c = self.encode(&info).expect("length matches by construction");
        (info, c)
    }

    /// The `k x n` generator matrix, one row per information bit.
    pub fn generator_matrix(&self) -> BinMatrix {
        let mut rows: Vec<Vec<usize>> = self.free.iter().map(|&f| vec![f]).collect();
        for (&pos, mask) in self.pivots.iter().zip(&self.parity_masks) {
            for (k, row) in rows.iter_mut().enumerate() {
                if bit(mask, k) {
                    row.push(pos);
                }
            }
        }
        BinMatrix::new(self.n, rows).expect("valid by construction")
    }
}
