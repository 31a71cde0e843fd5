use super::BinMatrix;

/// Bit-packed dense GF(2) matrix used for elimination.
#[derive(Debug, Clone)]
pub(crate) struct DenseGf2 {
    n_cols: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
}

/// Reduced row echelon form: the echelon rows plus the pivot column of each.
pub(crate) struct Echelon {
    pub rows: Vec<Vec<u64>>,
    pub pivots: Vec<usize>,
}

#[inline]
pub(crate) fn bit(row: &[u64], j: usize) -> bool {
    (row[j >> 6] >> (j & 63)) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(row: &mut [u64], j: usize) {
    row[j >> 6] |= 1u64 << (j & 63);
}

impl DenseGf2 {
    pub fn from_sparse(h: &BinMatrix) -> Self {
        let words = h.n_cols().div_ceil(64);
        let rows = h
            .rows()
            .iter()
            .map(|row| {
                let mut packed = vec![0u64; words];
                for &j in row {
                    set_bit(&mut packed, j);
                }
                packed
            })
            .collect();
        DenseGf2 { n_cols: h.n_cols(), words, rows }
    }

    pub fn rank(self) -> usize {
        self.echelon().pivots.len()
    }

    /// Gauss-Jordan elimination. Dependent rows are dropped.
    pub fn echelon(mut self) -> Echelon {
        let mut pivots = Vec::new();
        let mut rank = 0;
        let n_rows = self.rows.len();
        for col in 0..self.n_cols {
            if rank == n_rows {
                break;
            }
            let w = col >> 6;
            let mask = 1u64 << (col & 63);
            let Some(p) = (rank..n_rows).find(|&r| self.rows[r][w] & mask != 0) else {
                continue;
            };
            self.rows.swap(rank, p);
            let pivot = std::mem::take(&mut self.rows[rank]);
            for (r, row) in self.rows.iter_mut().enumerate() {
                if r != rank && row[w] & mask != 0 {
                    // columns before `w` are already clear in the pivot row
                    for (x, y) in row[w..].iter_mut().zip(&pivot[w..]) {
                        *x ^= *y;
                    }
                }
            }
            self.rows[rank] = pivot;
            pivots.push(col);
            rank += 1;
        }
        self.rows.truncate(rank);
        debug_assert!(self.rows.iter().all(|r| r.len() == self.words));
        Echelon { rows: self.rows, pivots }
    }
}
