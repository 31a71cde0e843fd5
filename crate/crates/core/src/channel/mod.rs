//! Two-user real Gaussian multiple access with BPSK inputs.
//!
//! Joint symbols are indexed `o = 2*b1 + b2` with user 1 as the high bit, so
//! the superimposed constellation is `[h1+h2, h1-h2, -h1+h2, -h1-h2]`.

use std::ops::Index;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::binmat::BinVector;
use crate::error::{Error, Result};

/// Joint symbol index of a bit pair.
#[inline]
pub fn eta(bit1: u8, bit2: u8) -> usize {
    (((bit1 & 1) << 1) | (bit2 & 1)) as usize
}

/// Bit pair `(user 1, user 2)` of a joint symbol.
#[inline]
pub fn eta_inv(o: usize) -> (u8, u8) {
    debug_assert!(o < 4);
    (((o >> 1) & 1) as u8, (o & 1) as u8)
}

/// BPSK level of one bit.
#[inline]
pub fn bpsk(bit: u8) -> f64 {
    if bit & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Probability vector over the four joint symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointPmf(pub [f64; 4]);

impl JointPmf {
    pub const UNIFORM: JointPmf = JointPmf([0.25; 4]);

    pub fn point(o: usize) -> Self {
        let mut p = [0.0; 4];
        p[o] = 1.0;
        JointPmf(p)
    }

    /// Normalizes nonnegative weights; `None` if they sum to zero.
    pub fn from_weights(w: [f64; 4]) -> Option<Self> {
        let s: f64 = w.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return None;
        }
        Some(JointPmf(w.map(|x| x / s)))
    }

    /// Product of two per-user binary PMFs `[P(0), P(1)]`.
    pub fn from_bits(user1: [f64; 2], user2: [f64; 2]) -> Self {
        let mut p = [0.0; 4];
        for (o, v) in p.iter_mut().enumerate() {
            let (b1, b2) = eta_inv(o);
            *v = user1[b1 as usize] * user2[b2 as usize];
        }
        JointPmf(p)
    }

    /// Most probable symbol, ties toward the smaller index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for o in 1..4 {
            if self.0[o] > self.0[best] {
                best = o;
            }
        }
        best
    }

    /// `[P(b1 = 0), P(b1 = 1)]`.
    pub fn user1(&self) -> [f64; 2] {
        [self.0[0] + self.0[1], self.0[2] + self.0[3]]
    }

    /// `[P(b2 = 0), P(b2 = 1)]`.
    pub fn user2(&self) -> [f64; 2] {
        [self.0[0] + self.0[2], self.0[1] + self.0[3]]
    }

    /// `[P(b1 ^ b2 = 0), P(b1 ^ b2 = 1)]`.
    pub fn xor(&self) -> [f64; 2] {
        [self.0[0] + self.0[3], self.0[1] + self.0[2]]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Index<usize> for JointPmf {
    type Output = f64;
    fn index(&self, o: usize) -> &f64 {
        &self.0[o]
    }
}

/// Gains, noise variance and the superimposed constellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub h1: f64,
    pub h2: f64,
    /// Noise variance per real sample.
    pub sigma2: f64,
    superimposed: [f64; 4],
}

impl ChannelParams {
    /// Requires `|h1| >= |h2|` and `sigma2 > 0`.
    pub fn new(h1: f64, h2: f64, sigma2: f64) -> Result<Self> {
        if !(h1.is_finite() && h2.is_finite()) || h1.abs() < h2.abs() {
            return Err(Error::Parameter(format!("gains must satisfy |h1| >= |h2|, got h1 = {h1}, h2 = {h2}")));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::Parameter(format!("noise variance must be positive, got {sigma2}")));
        }
        let mut superimposed = [0.0; 4];
        for (o, s) in superimposed.iter_mut().enumerate() {
            let (b1, b2) = eta_inv(o);
            *s = h1 * bpsk(b1) + h2 * bpsk(b2);
        }
        Ok(ChannelParams { h1, h2, sigma2, superimposed })
    }

    /// `snr_db = 10 log10(1 / (2 sigma2))`, unit symbol energy before gains.
    pub fn from_snr_db(h1: f64, h2: f64, snr_db: f64) -> Result<Self> {
        Self::new(h1, h2, sigma2_from_snr_db(snr_db))
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (1.0 / (2.0 * self.sigma2)).log10()
    }

    pub fn superimposed(&self) -> &[f64; 4] {
        &self.superimposed
    }

    /// Same noise, different gains.
    pub fn with_gains(&self, h1: f64, h2: f64) -> Result<Self> {
        Self::new(h1, h2, self.sigma2)
    }

    /// Log-likelihoods `-(y - x_o)^2 / (2 sigma2)` up to a common constant.
    #[inline]
    pub fn log_likelihoods(&self, y: f64) -> [f64; 4] {
        let k = -0.5 / self.sigma2;
        self.superimposed.map(|x| k * (y - x) * (y - x))
    }
}

pub fn sigma2_from_snr_db(snr_db: f64) -> f64 {
    0.5 * 10f64.powf(-snr_db / 10.0)
}

pub fn modulate(c: &BinVector) -> Vec<f64> {
    modulate_bits(c.bits())
}

pub fn modulate_bits(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| bpsk(b)).collect()
}

/// `y = h1 x1 + h2 x2 + z` with `z ~ N(0, sigma2)` per sample.
pub fn transmit<R: Rng + ?Sized>(x1: &[f64], x2: &[f64], params: &ChannelParams, rng: &mut R) -> Result<Vec<f64>> {
    if x1.len() != x2.len() {
        return Err(Error::Dimension { expected: x1.len(), found: x2.len() });
    }
    let noise = Normal::new(0.0, params.sigma2.sqrt()).expect("positive variance");
    Ok(x1.iter().zip(x2).map(|(&a, &b)| params.h1 * a + params.h2 * b + noise.sample(rng)).collect())
}

/// Posterior of the joint symbol under uniform inputs.
pub fn joint_channel_probs(y: f64, params: &ChannelParams) -> JointPmf {
    let ll = params.log_likelihoods(y);
    let m = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = ll.map(|l| (l - m).exp());
    let s: f64 = w.iter().sum();
    JointPmf(w.map(|x| x / s))
}

#[inline]
fn llr_of_sets(ll: &[f64; 4], zero: [usize; 2], one: [usize; 2]) -> f64 {
    ln_add(ll[zero[0]], ll[zero[1]]) - ln_add(ll[one[0]], ll[one[1]])
}

/// LLR of `b1 ^ b2`.
pub fn nc_llr(y: f64, params: &ChannelParams) -> f64 {
    llr_of_sets(&params.log_likelihoods(y), [0, 3], [1, 2])
}

/// Marginal LLR of one user's bit, averaging over the other user.
pub fn single_user_llr(y: f64, params: &ChannelParams, user: usize) -> f64 {
    let ll = params.log_likelihoods(y);
    match user {
        1 => llr_of_sets(&ll, [0, 1], [2, 3]),
        2 => llr_of_sets(&ll, [0, 2], [1, 3]),
        _ => panic!("user must be 1 or 2, got {user}"),
    }
}

/// LLR of `b1` given `b1 ^ b2 = nc`, i.e. `ln p(y | 0, nc) / p(y | 1, 1 ^ nc)`.
pub fn conditional_llr(y: f64, params: &ChannelParams, nc: u8) -> f64 {
    let ll = params.log_likelihoods(y);
    let nc = nc & 1;
    ll[eta(0, nc)] - ll[eta(1, 1 ^ nc)]
}

/// Single-user BPSK LLR `2 g y / sigma2`.
#[inline]
pub fn bpsk_llr(y: f64, gain: f64, sigma2: f64) -> f64 {
    2.0 * gain * y / sigma2
}
