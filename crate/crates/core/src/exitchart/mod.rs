//! Extrinsic information transfer curves for the joint and residual
//! constituent decoders.
//!
//! A-priori LLRs follow the consistent Gaussian model `N(s σ²/2, σ²)` with
//! `s = +1` for bit 0. Extrinsic information is measured with the
//! expectation estimator `1 - E[log2(1 + exp(-s L))]`, which assumes
//! nothing about the shape of the LLR distribution.
//!
//! Every point of a curve reuses the same codewords, channel noise and unit
//! Gaussian draws, so curves are smooth in `I_A` and reproducible.

use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::binmat::BinVector;
use crate::channel::{joint_channel_probs, modulate, transmit, ChannelParams, JointPmf};
use crate::codes::CodePair;
use crate::decoders::{clamp_llr, llr_to_pmf, pmf_to_llr, BpDecoder, JudDecoder};
use crate::error::{Error, Result};
use crate::infotheory::gauss_hermite;

/// Largest `σ_A` searched by [`j_inverse`].
const SIGMA_MAX: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitDecoder {
    Jud,
    Rud,
}

impl ExitDecoder {
    pub fn tag(self) -> &'static str {
        match self {
            ExitDecoder::Jud => "JUD",
            ExitDecoder::Rud => "RUD",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitPoint {
    pub i_a: f64,
    pub i_e: f64,
    pub user: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitCurve {
    pub decoder: ExitDecoder,
    /// `None` for RUD, which never sees the channel.
    pub snr_db: Option<f64>,
    /// Sorted by `i_a`.
    pub points: Vec<ExitPoint>,
}

fn gh_standard() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_hermite(200);
        let norm = 1.0 / std::f64::consts::PI.sqrt();
        (x.iter().map(|x| x * std::f64::consts::SQRT_2).collect(), w.iter().map(|w| w * norm).collect())
    })
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Mutual information between a bit and its consistent Gaussian LLR with
/// standard deviation `sigma_a`, by Gauss-Hermite integration.
pub fn j_function(sigma_a: f64) -> f64 {
    if sigma_a <= 0.0 {
        return 0.0;
    }
    let (x, w) = gh_standard();
    let m = 0.5 * sigma_a * sigma_a;
    let e: f64 = x.iter().zip(w).map(|(z, w)| w * softplus(-(m + sigma_a * z))).sum();
    (1.0 - e / std::f64::consts::LN_2).clamp(0.0, 1.0)
}

/// `σ_A` with `J(σ_A) = info`, by bisection.
pub fn j_inverse(info: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&info) {
        return Err(Error::Parameter(format!("mutual information must lie in [0, 1), got {info}")));
    }
    if info == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while j_function(hi) < info {
        lo = hi;
        hi *= 2.0;
        if hi > SIGMA_MAX {
            return Err(Error::Tolerance(format!("J^-1({info}) exceeds {SIGMA_MAX}")));
        }
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if j_function(mid) < info {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[inline]
fn sign(bit: u8) -> f64 {
    1.0 - 2.0 * bit as f64
}

/// Consistent Gaussian LLR from a unit normal draw `z`.
#[inline]
fn apriori_llr(bit: u8, sigma_a: f64, z: f64) -> f64 {
    sign(bit) * 0.5 * sigma_a * sigma_a + sigma_a * z
}

pub fn gen_apriori<R: Rng + ?Sized>(bits: &BinVector, i_a: f64, rng: &mut R) -> Result<Vec<f64>> {
    let sigma_a = j_inverse(i_a)?;
    Ok(bits
        .bits()
        .iter()
        .map(|&b| {
            let z: f64 = rng.sample(StandardNormal);
            apriori_llr(b, sigma_a, z)
        })
        .collect())
}

/// `1 - mean(log2(1 + exp(-s_i L_i)))`.
pub fn measure_mi(llrs: &[f64], bits: &[u8]) -> Result<f64> {
    if llrs.is_empty() || llrs.len() != bits.len() {
        return Err(Error::Dimension { expected: bits.len().max(1), found: llrs.len() });
    }
    let s: f64 = llrs.iter().zip(bits).map(|(&l, &b)| softplus(-sign(b) * l)).sum();
    Ok(1.0 - s / (llrs.len() as f64 * std::f64::consts::LN_2))
}

/// Histogram estimate of `I(bit; L)` with `bins` equal-width bins,
/// for cross-validating [`measure_mi`].
pub fn measure_mi_histogram(llrs: &[f64], bits: &[u8], bins: usize) -> Result<f64> {
    if llrs.is_empty() || llrs.len() != bits.len() || bins == 0 {
        return Err(Error::Dimension { expected: bits.len().max(1), found: llrs.len() });
    }
    let lo = llrs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = llrs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![[0usize; 2]; bins];
    let mut totals = [0usize; 2];
    for (&l, &b) in llrs.iter().zip(bits) {
        let k = (((l - lo) / width) as usize).min(bins - 1);
        counts[k][b as usize] += 1;
        totals[b as usize] += 1;
    }
    let mut mi = 0.0;
    for c in &counts {
        let pdf = [c[0] as f64 / totals[0].max(1) as f64, c[1] as f64 / totals[1].max(1) as f64];
        let mix = 0.5 * (pdf[0] + pdf[1]);
        for p in pdf {
            if p > 0.0 {
                mi += 0.5 * p * (p / mix).log2();
            }
        }
    }
    Ok(mi)
}

/// Monte Carlo effort and decoder budget for one curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitConfig {
    pub trials: usize,
    pub inner_iters: usize,
    pub seed: u64,
}

impl Default for ExitConfig {
    fn default() -> Self {
        ExitConfig { trials: 50, inner_iters: 30, seed: 0 }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|g| !(0.0..1.0).contains(g)) {
        return Err(Error::Parameter(format!("a-priori grid must be strictly increasing within [0, 1): {grid:?}")));
    }
    Ok(())
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Both users' JUD transfer curves at one channel state: user 2 receives
/// the a-priori input; user 1's output is its full posterior.
pub fn transfer_jud(pair: &CodePair, params: &ChannelParams, grid: &[f64], cfg: &ExitConfig) -> Result<[ExitCurve; 2]> {
    check_grid(grid)?;
    let jud = JudDecoder::new(&pair.hc);
    let sigmas: Vec<f64> = grid.iter().map(|&i| j_inverse(i)).collect::<Result<_>>()?;
    struct Trial {
        c1: BinVector,
        c2: BinVector,
        p_ch: Vec<JointPmf>,
        z: Vec<f64>,
    }
    let trials: Vec<Trial> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let (_, c1) = pair.encoder1().random_codeword(&mut rng);
            let (_, c2) = pair.encoder2().random_codeword(&mut rng);
            let y = transmit(&modulate(&c1), &modulate(&c2), params, &mut rng)?;
            let p_ch = y.iter().map(|&v| joint_channel_probs(v, params)).collect();
            let z = (0..pair.len()).map(|_| rng.sample(StandardNormal)).collect();
            Ok(Trial { c1, c2, p_ch, z })
        })
        .collect::<Result<_>>()?;

    let measured: Vec<(f64, f64)> = sigmas
        .par_iter()
        .map(|&sigma_a| {
            let mut l1 = Vec::new();
            let mut l2 = Vec::new();
            let mut b1 = Vec::new();
            let mut b2 = Vec::new();
            for t in &trials {
                let a: Vec<f64> = t.c2.bits().iter().zip(&t.z).map(|(&b, &z)| clamp_llr(apriori_llr(b, sigma_a, z))).collect();
                let prior: Vec<[f64; 2]> = a.iter().map(|&l| llr_to_pmf(l)).collect();
                let out = jud.decode(&t.p_ch, Some(&prior), cfg.inner_iters, false);
                for (i, w) in out.w.iter().enumerate() {
                    l1.push(pmf_to_llr(w.user1()));
                    l2.push(clamp_llr(pmf_to_llr(w.user2()) - a[i]));
                }
                b1.extend_from_slice(t.c1.bits());
                b2.extend_from_slice(t.c2.bits());
            }
            Ok((measure_mi(&l1, &b1)?, measure_mi(&l2, &b2)?))
        })
        .collect::<Result<_>>()?;

    let curve = |user: u8| ExitCurve {
        decoder: ExitDecoder::Jud,
        snr_db: Some(params.snr_db()),
        points: grid.iter().zip(&measured).map(|(&i_a, m)| ExitPoint { i_a, i_e: if user == 1 { m.0 } else { m.1 }, user }).collect(),
    };
    Ok([curve(1), curve(2)])
}

/// RUD transfer curve from a-priori input alone, measured on user 2.
pub fn transfer_rud(pair: &CodePair, grid: &[f64], cfg: &ExitConfig) -> Result<ExitCurve> {
    check_grid(grid)?;
    let rud = BpDecoder::new(&pair.ha);
    let trials: Vec<(BinVector, Vec<f64>)> = (0..cfg.trials)
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let (_, c2) = pair.encoder2().random_codeword(&mut rng);
            let z = (0..pair.len()).map(|_| rng.sample(StandardNormal)).collect();
            (c2, z)
        })
        .collect();
    let points = grid
        .par_iter()
        .map(|&i_a| {
            let sigma_a = j_inverse(i_a)?;
            let mut ext = Vec::new();
            let mut bits = Vec::new();
            for (c2, z) in &trials {
                let a: Vec<f64> = c2.bits().iter().zip(z).map(|(&b, &z)| clamp_llr(apriori_llr(b, sigma_a, z))).collect();
                let out = rud.decode(&a, cfg.inner_iters, false);
                ext.extend(out.extrinsic);
                bits.extend_from_slice(c2.bits());
            }
            Ok(ExitPoint { i_a, i_e: measure_mi(&ext, &bits)?, user: 2 })
        })
        .collect::<Result<_>>()?;
    Ok(ExitCurve { decoder: ExitDecoder::Rud, snr_db: None, points })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tunnel {
    pub open: bool,
    pub min_gap: f64,
}

/// JUD output treated as fully decoded.
pub const SATURATION: f64 = 1.0 - 1e-3;

/// `I_RA` the RUD needs to output `target`, by linear interpolation on its
/// curve; `None` when the curve never reaches `target`.
fn rud_required_input(rud: &ExitCurve, target: f64) -> Option<f64> {
    let pts = &rud.points;
    if target <= pts[0].i_e {
        return Some(pts[0].i_a);
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if target <= b.i_e {
            if b.i_e <= a.i_e {
                return Some(b.i_a);
            }
            return Some(a.i_a + (b.i_a - a.i_a) * (target - a.i_e) / (b.i_e - a.i_e));
        }
    }
    None
}

/// Compares the JUD user-2 curve with the RUD curve drawn on swapped axes:
/// the gap at grid point `x` is `T_U(x) - T_R^{-1}(x)`.
///
/// Points where RUD cannot produce `x` are skipped, and the scan stops at
/// the first point where JUD saturates, since the trajectory has converged
/// there and both curves meet near `(1, 1)` regardless of the code.
pub fn tunnel_open(jud_user2: &ExitCurve, rud: &ExitCurve) -> Result<Tunnel> {
    if jud_user2.points.is_empty() || rud.points.is_empty() {
        return Err(Error::Parameter("tunnel needs two nonempty curves".into()));
    }
    let mut min_gap = f64::INFINITY;
    for p in &jud_user2.points {
        if let Some(need) = rud_required_input(rud, p.i_a) {
            min_gap = min_gap.min(p.i_e - need);
        }
        if p.i_e >= SATURATION {
            break;
        }
    }
    if !min_gap.is_finite() {
        return Err(Error::Parameter("curves share no comparable grid point".into()));
    }
    Ok(Tunnel { open: min_gap > 0.0, min_gap })
}

pub const CSV_HEADER: &str = "decoder,user,snr_db,h1,h2,R1,R2,I_A,I_E";

/// Curve context written alongside each point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveContext {
    pub h1: f64,
    pub h2: f64,
    pub r1: f64,
    pub r2: f64,
}

pub fn write_csv(path: &Path, curves: &[(CurveContext, &ExitCurve)]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let mut emit = || -> std::io::Result<()> {
        writeln!(f, "{CSV_HEADER}")?;
        for (ctx, c) in curves {
            let snr = c.snr_db.map(|s| format!("{s}")).unwrap_or_default();
            for p in &c.points {
                writeln!(f, "{},{},{},{},{},{},{},{},{:.9}", c.decoder.tag(), p.user, snr, ctx.h1, ctx.h2, ctx.r1, ctx.r2, p.i_a, p.i_e)?;
            }
        }
        f.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests;
