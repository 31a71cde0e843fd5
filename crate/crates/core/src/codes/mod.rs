//! Nested code pairs for rate-diverse multiple access.
//!
//! A [`CodePair`] holds the strong user's matrix `H1`, the weak user's
//! low-rate matrix `H2`, and the split of `H2` into the common part `Hc`
//! (shared with `H1`) and the residual part `Ha`. Two constructions produce
//! such pairs: row extension appends rows below `H1`, and row combining XORs
//! groups of disjoint rows of `H2`.

pub mod library;
mod persist;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::binmat::{BinMatrix, BinVector, Encoder};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    /// Row extending: `H2 = [H1; He]`.
    RowExtend,
    /// Row combining: `H1 = [Hd; combined rows of Hr]`.
    RowCombine,
}

impl Construction {
    pub fn tag(self) -> &'static str {
        match self {
            Construction::RowExtend => "re",
            Construction::RowCombine => "rc",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "re" => Some(Construction::RowExtend),
            "rc" => Some(Construction::RowCombine),
            _ => None,
        }
    }
}

/// Which existing rows an appended row must not share two columns with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyclePolicy {
    /// Every row of the extended matrix, including the base.
    Global,
    /// Only the other appended rows.
    AppendedOnly,
    /// No check.
    Unchecked,
}

/// How the columns of an appended row are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Uniformly random supports, rejected wholesale on a four-cycle.
    Uniform,
    /// Columns drawn among those least covered by the appended rows so far.
    Balanced,
}

#[derive(Debug, Clone)]
pub struct ReParams {
    pub extra_rows: usize,
    pub row_weight: usize,
    pub rng_seed: u64,
    pub cycle_policy: CyclePolicy,
    pub placement: Placement,
    /// Attempts per appended row before giving up.
    pub max_attempts: usize,
}

impl ReParams {
    pub fn new(extra_rows: usize, rng_seed: u64) -> Self {
        ReParams {
            extra_rows,
            row_weight: 3,
            rng_seed,
            cycle_policy: CyclePolicy::Global,
            placement: Placement::Uniform,
            max_attempts: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RcParams {
    /// Rows per group.
    pub group_size: usize,
    /// Row indices of `H2`, one list per combined row.
    pub groups: Vec<Vec<usize>>,
}

/// Nested parity-check matrices sharing block length `L`.
#[derive(Debug, Clone)]
pub struct CodePair {
    pub h1: BinMatrix,
    pub h2: BinMatrix,
    pub hc: BinMatrix,
    pub ha: BinMatrix,
    pub construction: Construction,
    pub seed: Option<u64>,
    enc1: Encoder,
    enc2: Encoder,
}

impl CodePair {
    pub fn new(h1: BinMatrix, h2: BinMatrix, hc: BinMatrix, ha: BinMatrix, construction: Construction, seed: Option<u64>) -> Result<Self> {
        let l = h1.n_cols();
        for m in [&h2, &hc, &ha] {
            if m.n_cols() != l {
                return Err(Error::Dimension { expected: l, found: m.n_cols() });
            }
        }
        let enc1 = Encoder::new(&h1);
        let enc2 = Encoder::new(&h2);
        Ok(CodePair { h1, h2, hc, ha, construction, seed, enc1, enc2 })
    }

    /// Block length.
    pub fn len(&self) -> usize {
        self.h1.n_cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encoder1(&self) -> &Encoder {
        &self.enc1
    }

    pub fn encoder2(&self) -> &Encoder {
        &self.enc2
    }

    pub fn k1(&self) -> usize {
        self.enc1.k()
    }

    pub fn k2(&self) -> usize {
        self.enc2.k()
    }

    /// Rank-effective rate of user 1.
    pub fn r1(&self) -> f64 {
        self.enc1.rate()
    }

    /// Rank-effective rate of user 2.
    pub fn r2(&self) -> f64 {
        self.enc2.rate()
    }

    /// True when `H2` is exactly `Hc` and `Ha` together, row multiset-wise.
    pub fn rows_partition_h2(&self) -> bool {
        let mut counts: HashMap<&[usize], isize> = HashMap::new();
        for row in self.h2.rows() {
            *counts.entry(row.as_slice()).or_default() += 1;
        }
        for row in self.hc.rows().iter().chain(self.ha.rows()) {
            *counts.entry(row.as_slice()).or_default() -= 1;
        }
        counts.values().all(|&c| c == 0)
    }

    /// Equal-rate pair where both users share `h`; the residual is empty.
    pub fn equal_rate(h: BinMatrix) -> Result<Self> {
        let ha = BinMatrix::empty(h.n_cols());
        CodePair::new(h.clone(), h.clone(), h, ha, Construction::RowExtend, None)
    }
}

fn shares_a_row(cols: &[Vec<usize>], a: usize, b: usize) -> bool {
    let (x, y) = (&cols[a], &cols[b]);
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

fn support_conflicts(cols: &[Vec<usize>], support: &[usize]) -> bool {
    for (i, &a) in support.iter().enumerate() {
        for &b in &support[i + 1..] {
            if shares_a_row(cols, a, b) {
                return true;
            }
        }
    }
    false
}

fn draw_uniform(rng: &mut ChaCha8Rng, n_cols: usize, weight: usize) -> Vec<usize> {
    let mut support = rand::seq::index::sample(rng, n_cols, weight).into_vec();
    support.sort_unstable();
    support
}

fn draw_balanced(rng: &mut ChaCha8Rng, cols: &[Vec<usize>], appended_deg: &[usize], weight: usize) -> Option<Vec<usize>> {
    let mut support: Vec<usize> = Vec::with_capacity(weight);
    for _ in 0..weight {
        let mut best = usize::MAX;
        let mut pool = Vec::new();
        for (c, &deg) in appended_deg.iter().enumerate() {
            if deg > best || support.contains(&c) {
                continue;
            }
            if support.iter().any(|&s| shares_a_row(cols, s, c)) {
                continue;
            }
            if deg < best {
                best = deg;
                pool.clear();
            }
            pool.push(c);
        }
        if pool.is_empty() {
            return None;
        }
        support.push(pool[rng.random_range(0..pool.len())]);
    }
    support.sort_unstable();
    Some(support)
}

/// Row-extending construction: appends `extra_rows` rows of weight
/// `row_weight` below `h1`.
pub fn extend_re(h1: &BinMatrix, params: &ReParams) -> Result<CodePair> {
    let l = h1.n_cols();
    if params.extra_rows > 0 && (params.row_weight < 2 || params.row_weight > l) {
        return Err(Error::Parameter(format!("row weight {} must lie in 2..={l}", params.row_weight)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    // column -> rows in scope of the four-cycle check
    let mut cols: Vec<Vec<usize>> = match params.cycle_policy {
        CyclePolicy::Global => h1.columns(),
        _ => vec![Vec::new(); l],
    };
    let mut appended_deg = vec![0usize; l];
    let mut extra: Vec<Vec<usize>> = Vec::with_capacity(params.extra_rows);

    for row_idx in 0..params.extra_rows {
        let check = params.cycle_policy != CyclePolicy::Unchecked;
        let mut found = None;
        for _ in 0..params.max_attempts.max(1) {
            let candidate = match params.placement {
                Placement::Uniform => draw_uniform(&mut rng, l, params.row_weight),
                Placement::Balanced => match draw_balanced(&mut rng, &cols, &appended_deg, params.row_weight) {
                    Some(s) => s,
                    None => continue,
                },
            };
            if check && support_conflicts(&cols, &candidate) {
                continue;
            }
            found = Some(candidate);
            break;
        }
        let Some(support) = found else {
            return Err(Error::Construction(format!(
                "no four-cycle-free placement for appended row {row_idx} after {} attempts",
                params.max_attempts
            )));
        };
        let global_index = h1.n_rows() + row_idx;
        for &c in &support {
            appended_deg[c] += 1;
            if check {
                cols[c].push(global_index);
            }
        }
        extra.push(support);
    }

    let he = BinMatrix::new(l, extra)?;
    let h2 = h1.stack(&he)?;
    CodePair::new(h1.clone(), h2, h1.clone(), he, Construction::RowExtend, Some(params.rng_seed))
}

/// Row-combining construction: each group of rows of `h2` is replaced by
/// its GF(2) sum in `H1`. Rows in a group must have disjoint supports.
pub fn combine_rc(h2: &BinMatrix, params: &RcParams) -> Result<CodePair> {
    let l = h2.n_cols();
    if params.group_size < 2 {
        return Err(Error::Parameter("row groups need at least two rows".into()));
    }
    let mut used = vec![false; h2.n_rows()];
    let mut combined = Vec::with_capacity(params.groups.len());
    let mut residual_rows = Vec::new();
    let mut owner = vec![usize::MAX; l];
    for (g, group) in params.groups.iter().enumerate() {
        if group.len() != params.group_size {
            return Err(Error::Parameter(format!("group {g} has {} rows, expected {}", group.len(), params.group_size)));
        }
        let mut union = Vec::new();
        for &r in group {
            if r >= h2.n_rows() {
                return Err(Error::Parameter(format!("group {g} names missing row {r}")));
            }
            if used[r] {
                return Err(Error::Parameter(format!("row {r} appears in more than one group")));
            }
            used[r] = true;
            for &c in h2.row(r) {
                if owner[c] == g {
                    return Err(Error::RowOverlap { group: g, column: c });
                }
                owner[c] = g;
                union.push(c);
            }
            residual_rows.push(r);
        }
        union.sort_unstable();
        combined.push(union);
    }
    let kept: Vec<usize> = (0..h2.n_rows()).filter(|&r| !used[r]).collect();
    let hd = h2.select_rows(&kept);
    let hr = h2.select_rows(&residual_rows);
    let h1 = hd.stack(&BinMatrix::new(l, combined)?)?;
    CodePair::new(h1, h2.clone(), hd, hr, Construction::RowCombine, None)
}

/// Greedily proposes `n_groups` disjoint-support groups of `group_size`
/// rows drawn from `eligible` rows of `h2`.
pub fn propose_rc_groups(h2: &BinMatrix, eligible: &[usize], group_size: usize, n_groups: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = eligible.to_vec();
    pool.shuffle(&mut rng);
    let mut used = vec![false; h2.n_rows()];
    let mut mark = vec![false; h2.n_cols()];
    let mut groups = Vec::with_capacity(n_groups);
    for start in 0..pool.len() {
        if groups.len() == n_groups {
            break;
        }
        let r0 = pool[start];
        if used[r0] {
            continue;
        }
        let mut group = vec![r0];
        for &c in h2.row(r0) {
            mark[c] = true;
        }
        for &r in &pool[start + 1..] {
            if group.len() == group_size {
                break;
            }
            if used[r] || h2.row(r).iter().any(|&c| mark[c]) {
                continue;
            }
            for &c in h2.row(r) {
                mark[c] = true;
            }
            group.push(r);
        }
        for &r in &group {
            for &c in h2.row(r) {
                mark[c] = false;
            }
        }
        if group.len() == group_size {
            for &r in &group {
                used[r] = true;
            }
            groups.push(group);
        }
    }
    if groups.len() < n_groups {
        return Err(Error::Construction(format!("found only {} of {n_groups} disjoint row groups", groups.len())));
    }
    Ok(groups)
}

/// Outcome of one sampled identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub holds: bool,
    pub samples: usize,
    /// First failing sample and the rows whose parity is violated.
    pub witness: Option<(usize, Vec<usize>)>,
}

impl IdentityCheck {
    fn new() -> Self {
        IdentityCheck { holds: true, samples: 0, witness: None }
    }

    fn record(&mut self, sample: usize, syndrome: &BinVector) {
        self.samples += 1;
        if self.holds && !syndrome.is_zero() {
            self.holds = false;
            self.witness = Some((sample, syndrome.support()));
        }
    }
}

/// Sampled verification of the nesting identities.
#[derive(Debug, Clone, PartialEq)]
pub struct NestingReport {
    /// Codewords of both users satisfy `Hc`.
    pub common: IdentityCheck,
    /// `c1 xor c2` satisfies `Hc`.
    pub xor_closure: IdentityCheck,
    /// Codewords of user 2 satisfy `Ha`.
    pub residual: IdentityCheck,
    /// Rows of `H2` are exactly the rows of `Hc` and `Ha`.
    pub partition: bool,
}

impl NestingReport {
    pub fn all_hold(&self) -> bool {
        self.common.holds && self.xor_closure.holds && self.residual.holds && self.partition
    }
}

pub fn verify_nested(pair: &CodePair, samples: usize, seed: u64) -> NestingReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut common = IdentityCheck::new();
    let mut xor_closure = IdentityCheck::new();
    let mut residual = IdentityCheck::new();
    for s in 0..samples {
        let (_, c1) = pair.encoder1().random_codeword(&mut rng);
        let (_, c2) = pair.encoder2().random_codeword(&mut rng);
        let s1 = pair.hc.syndrome(&c1).expect("dims checked");
        let s2 = pair.hc.syndrome(&c2).expect("dims checked");
        common.record(s, if s1.is_zero() { &s2 } else { &s1 });
        let c = c1.xor(&c2).expect("same length");
        xor_closure.record(s, &pair.hc.syndrome(&c).expect("dims checked"));
        residual.record(s, &pair.ha.syndrome(&c2).expect("dims checked"));
    }
    NestingReport { common, xor_closure, residual, partition: pair.rows_partition_h2() }
}

#[cfg(test)]
mod tests;
