//! Base parity-check matrices: the (273,191) projective-geometry
//! difference-set code and a girth-6 random LDPC generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::binmat::BinMatrix;
use crate::error::{Error, Result};

/// x^12 + x^6 + x^4 + x + 1, primitive over GF(2).
const GF4096_POLY: u32 = 0x1053;

fn gf4096_mul(a: u32, b: u32) -> u32 {
    let (mut a, mut b, mut acc) = (a, b, 0u32);
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & 0x1000 != 0 {
            a ^= GF4096_POLY;
        }
    }
    acc
}

fn gf4096_pow(a: u32, mut e: u32) -> u32 {
    let (mut base, mut acc) = (a, 1u32);
    while e != 0 {
        if e & 1 != 0 {
            acc = gf4096_mul(acc, base);
        }
        base = gf4096_mul(base, base);
        e >>= 1;
    }
    acc
}

/// Singer perfect difference set of PG(2,16): 17 residues mod 273.
///
/// The points of the plane are the powers of a primitive element of
/// GF(2^12) modulo GF(16)*; a line is the kernel of the trace map onto
/// GF(16), which is a 2-dimensional GF(16)-subspace.
pub fn pg16_difference_set() -> Vec<usize> {
    let alpha = 0b10u32;
    let trace = |x: u32| x ^ gf4096_pow(x, 16) ^ gf4096_pow(x, 256);
    let mut set: Vec<usize> = Vec::new();
    let mut x = 1u32;
    for i in 0..4095usize {
        if trace(x) == 0 && !set.contains(&(i % 273)) {
            set.push(i % 273);
        }
        x = gf4096_mul(x, alpha);
    }
    set.sort_unstable();
    set
}

/// The 273 x 273 circulant parity-check matrix of the (273,191) cyclic
/// difference-set LDPC code (row and column weight 17, GF(2) rank 82).
pub fn pg273() -> BinMatrix {
    let d = pg16_difference_set();
    let rows = (0..273).map(|r| d.iter().map(|&x| (x + r) % 273).collect()).collect();
    BinMatrix::new(273, rows).expect("valid circulant")
}

/// Random LDPC matrix with `n_rows` checks and constant column weight,
/// built column by column with near-uniform row degrees.
///
/// Each edge goes to a least-loaded row that does not share a column with
/// the rows already chosen for the current column, so the result is free of
/// four-cycles unless the greedy search runs out of candidates (in which
/// case the least-loaded row is taken anyway).
pub fn random_ldpc(n_cols: usize, n_rows: usize, col_weight: usize, seed: u64) -> Result<BinMatrix> {
    if col_weight == 0 || col_weight > n_rows {
        return Err(Error::Parameter(format!("column weight {col_weight} needs 1..={n_rows} rows")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n_rows];
    let mut blocked = vec![false; n_cols];
    let mut taken = vec![false; n_rows];
    let mut order: Vec<usize> = (0..n_cols).collect();
    order.shuffle(&mut rng);

    for &col in &order {
        let mut chosen: Vec<usize> = Vec::with_capacity(col_weight);
        for _ in 0..col_weight {
            let mut best_deg = usize::MAX;
            let mut pool: Vec<usize> = Vec::new();
            let mut fallback_deg = usize::MAX;
            let mut fallback: Vec<usize> = Vec::new();
            for (r, row) in rows.iter().enumerate() {
                if taken[r] {
                    continue;
                }
                let deg = row.len();
                if deg < fallback_deg {
                    fallback_deg = deg;
                    fallback.clear();
                }
                if deg == fallback_deg {
                    fallback.push(r);
                }
                if deg > best_deg {
                    continue;
                }
                if row.iter().any(|&c| blocked[c]) {
                    continue;
                }
                if deg < best_deg {
                    best_deg = deg;
                    pool.clear();
                }
                pool.push(r);
            }
            let pick_from = if pool.is_empty() { &fallback } else { &pool };
            let r = pick_from[rng.random_range(0..pick_from.len())];
            taken[r] = true;
            for &c in &rows[r] {
                blocked[c] = true;
            }
            chosen.push(r);
        }
        for &r in &chosen {
            for &c in &rows[r] {
                blocked[c] = false;
            }
            taken[r] = false;
            rows[r].push(col);
        }
    }
    BinMatrix::new(n_cols, rows)
}
