//! Monte Carlo BER engine.
//!
//! Every block draws its messages and noise from a ChaCha8 stream keyed by
//! `(master_seed, snr_db, block_index)`, so results do not depend on the
//! worker count or on which other SNR points share the run. Blocks run in
//! fixed-size batches; results are reduced in block order and the stopping
//! rule is applied block by block, discarding any surplus of the last batch.

mod csv;

pub use csv::{parse_results, write_results, CsvSink, ResultRow, CSV_HEADER};

use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::binmat::BinVector;
use crate::channel::{modulate, transmit, ChannelParams};
use crate::codes::CodePair;
use crate::config::KeyValues;
use crate::decoders::{single_user_decode, RdjdConfig, RdjdDecoder, SicDecoder, SicOrder, XorCdDecoder};
use crate::error::{Error, Result};

/// Blocks decoded per parallel batch; fixed so the stopping point never
/// depends on the worker count.
pub const BATCH: usize = 32;
/// Blocks in a rate-achievement test.
pub const RATE_TEST_BLOCKS: usize = 500;
/// Pooled BER below which a rate pair counts as achieved.
pub const RATE_TEST_BER: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Rdjd,
    RdjdNoniter,
    XorCd,
    Sic,
    SingleUserRef,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Rdjd => "rdjd",
            Scheme::RdjdNoniter => "rdjd-noniter",
            Scheme::XorCd => "xorcd-2step",
            Scheme::Sic => "sic",
            Scheme::SingleUserRef => "single-user-ref",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        [Scheme::Rdjd, Scheme::RdjdNoniter, Scheme::XorCd, Scheme::Sic, Scheme::SingleUserRef].into_iter().find(|s| s.tag() == tag)
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub scheme: Scheme,
    pub pair: Arc<CodePair>,
    /// Label written to the `construction` column.
    pub construction: String,
    pub h1: f64,
    pub h2: f64,
    /// Strictly increasing.
    pub snr_db: Vec<f64>,
    pub max_blocks: usize,
    /// Erroneous blocks (either user) after which a point stops.
    pub min_error_events: usize,
    pub master_seed: u64,
    /// Used by both RDJD schemes; the non-iterative one forces one round.
    pub rdjd: RdjdConfig,
    /// Inner iterations per step for XOR-CD, SIC and the reference.
    pub baseline_iters: usize,
}

impl Experiment {
    pub fn new(scheme: Scheme, pair: Arc<CodePair>, h1: f64, h2: f64, snr_db: Vec<f64>, master_seed: u64) -> Self {
        let construction = pair.construction.tag().to_string();
        Experiment {
            scheme,
            pair,
            construction,
            h1,
            h2,
            snr_db,
            max_blocks: 1000,
            min_error_events: 100,
            master_seed,
            rdjd: RdjdConfig::default(),
            baseline_iters: 75,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config { line: 0, message: m });
        if self.snr_db.is_empty() || self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("snr_db must be a nonempty increasing list, got {:?}", self.snr_db));
        }
        if self.max_blocks == 0 || self.min_error_events == 0 || self.baseline_iters == 0 {
            return bad("max_blocks, min_error_events and baseline_iters must be positive".into());
        }
        self.rdjd.validate().map_err(|e| Error::Config { line: 0, message: e.to_string() })?;
        ChannelParams::new(self.h1, self.h2, 1.0).map_err(|e| Error::Config { line: 0, message: e.to_string() })?;
        let p = &self.pair;
        match self.scheme {
            Scheme::Rdjd | Scheme::RdjdNoniter | Scheme::XorCd if p.hc.n_rows() == 0 => {
                bad(format!("{} needs common checks, the pair has none", self.scheme.tag()))
            }
            Scheme::Sic if p.h1.n_rows() == 0 || p.h2.n_rows() == 0 => bad("sic needs both H1 and H2".into()),
            Scheme::SingleUserRef if self.h2 != 0.0 => bad(format!("single-user-ref transmits one user; set h2 = 0, got {}", self.h2)),
            _ => Ok(()),
        }
    }

    /// Information bits per block for each user.
    pub fn info_bits(&self) -> (usize, usize) {
        match self.scheme {
            Scheme::SingleUserRef => (self.pair.k1(), 0),
            _ => (self.pair.k1(), self.pair.k2()),
        }
    }

    /// Keys accepted by [`Experiment::from_config`].
    pub const KEYS: [&'static str; 15] = [
        "scheme",
        "pair",
        "construction",
        "h1",
        "h2",
        "snr_db",
        "max_blocks",
        "min_error_events",
        "master_seed",
        "outer_iters",
        "jud_inner_iters",
        "rud_inner_iters",
        "early_stop",
        "extrinsic_to_rud",
        "baseline_iters",
    ];

    /// Builds an experiment from `key = value` text. `pair` is a code
    /// directory, resolved against `base_dir` when relative.
    pub fn from_config(kv: &KeyValues, base_dir: &Path) -> Result<Self> {
        kv.reject_unknown(&Self::KEYS)?;
        let scheme_entry = kv.required("scheme")?;
        let scheme = Scheme::from_tag(&scheme_entry.value)
            .ok_or_else(|| Error::Config { line: scheme_entry.line, message: format!("unknown scheme {:?}", scheme_entry.value) })?;
        let pair_entry = kv.required("pair")?;
        let dir = base_dir.join(&pair_entry.value);
        let pair =
            CodePair::load(&dir).map_err(|e| Error::Config { line: pair_entry.line, message: format!("cannot load code pair: {e}") })?;
        let mut exp = Experiment::new(
            scheme,
            Arc::new(pair),
            kv.required("h1")?.parse()?,
            kv.value_or("h2", 0.0)?,
            kv.required("snr_db")?.parse_list()?,
            kv.required("master_seed")?.parse()?,
        );
        if let Some(c) = kv.get("construction") {
            exp.construction = c.value.clone();
        }
        exp.max_blocks = kv.value_or("max_blocks", exp.max_blocks)?;
        exp.min_error_events = kv.value_or("min_error_events", exp.min_error_events)?;
        exp.baseline_iters = kv.value_or("baseline_iters", exp.baseline_iters)?;
        let d = RdjdConfig::default();
        exp.rdjd = RdjdConfig {
            outer_iters: kv.value_or("outer_iters", d.outer_iters)?,
            jud_inner_iters: kv.value_or("jud_inner_iters", d.jud_inner_iters)?,
            rud_inner_iters: kv.value_or("rud_inner_iters", d.rud_inner_iters)?,
            early_stop: kv.value_or("early_stop", d.early_stop)?,
            extrinsic_to_rud: kv.value_or("extrinsic_to_rud", d.extrinsic_to_rud)?,
        };
        exp.validate()?;
        Ok(exp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub blocks: usize,
    pub errs1: usize,
    pub errs2: usize,
    /// Blocks with at least one information-bit error.
    pub block_errors: usize,
    pub ber1: f64,
    pub ber2: f64,
    pub ber_avg: f64,
    pub avg_outer_iters: f64,
}

/// Per-block result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct BlockResult {
    errs1: usize,
    errs2: usize,
    outer: usize,
}

/// Decoders for one scheme, prepared once per experiment.
enum Receiver {
    Rdjd(RdjdDecoder, RdjdConfig),
    XorCd(XorCdDecoder),
    Sic(SicDecoder),
    Single,
}

impl Receiver {
    fn new(exp: &Experiment) -> Self {
        match exp.scheme {
            Scheme::Rdjd => Receiver::Rdjd(RdjdDecoder::new(&exp.pair), exp.rdjd),
            Scheme::RdjdNoniter => Receiver::Rdjd(RdjdDecoder::new(&exp.pair), RdjdConfig { outer_iters: 1, ..exp.rdjd }),
            Scheme::XorCd => Receiver::XorCd(XorCdDecoder::new(&exp.pair)),
            Scheme::Sic => Receiver::Sic(SicDecoder::new(&exp.pair)),
            Scheme::SingleUserRef => Receiver::Single,
        }
    }
}

/// Stream for one block; the key is the tuple itself.
pub fn block_rng(master_seed: u64, snr_db: f64, block: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&snr_db.to_bits().to_le_bytes());
    key[16..24].copy_from_slice(&block.to_le_bytes());
    key[24..].copy_from_slice(b"rdgmac-b");
    ChaCha8Rng::from_seed(key)
}

fn info_errors(pair_enc: &crate::binmat::Encoder, info: &[u8], c_hat: &BinVector) -> usize {
    pair_enc.extract(c_hat).iter().zip(info).filter(|(a, b)| a != b).count()
}

fn run_block(exp: &Experiment, rx: &Receiver, params: &ChannelParams, snr_db: f64, block: u64) -> Result<BlockResult> {
    let pair = &exp.pair;
    let mut rng = block_rng(exp.master_seed, snr_db, block);
    let (u1, c1) = pair.encoder1().random_codeword(&mut rng);
    if let Receiver::Single = rx {
        let x2 = vec![0.0; pair.len()];
        let y = transmit(&modulate(&c1), &x2, params, &mut rng)?;
        let out = single_user_decode(&y, &pair.h1, params.h1, params.sigma2, exp.baseline_iters)?;
        let c = BinVector::from_bits(out.hard);
        return Ok(BlockResult { errs1: info_errors(pair.encoder1(), &u1, &c), errs2: 0, outer: 1 });
    }
    let (u2, c2) = pair.encoder2().random_codeword(&mut rng);
    let y = transmit(&modulate(&c1), &modulate(&c2), params, &mut rng)?;
    let out = match rx {
        Receiver::Rdjd(d, cfg) => d.decode(&y, params, cfg)?,
        Receiver::XorCd(d) => d.decode(&y, params, exp.baseline_iters)?,
        Receiver::Sic(d) => d.decode(&y, params, exp.baseline_iters, SicOrder::StrongFirst)?,
        Receiver::Single => unreachable!(),
    };
    Ok(BlockResult {
        errs1: info_errors(pair.encoder1(), &u1, &out.c1_hat),
        errs2: info_errors(pair.encoder2(), &u2, &out.c2_hat),
        outer: out.outer_iters_used,
    })
}

/// Runs one SNR point for at most `max_blocks`, stopping early once
/// `stop_events` erroneous blocks are seen.
fn run_point(exp: &Experiment, rx: &Receiver, snr_db: f64, max_blocks: usize, stop_events: Option<usize>) -> Result<BerPoint> {
    let params = ChannelParams::from_snr_db(exp.h1, exp.h2, snr_db)?;
    let (k1, k2) = exp.info_bits();
    let (mut blocks, mut errs1, mut errs2, mut events, mut outer) = (0usize, 0usize, 0usize, 0usize, 0usize);
    'outer: while blocks < max_blocks {
        let start = blocks;
        let end = (start + BATCH).min(max_blocks);
        let batch: Vec<BlockResult> =
            (start..end).into_par_iter().map(|b| run_block(exp, rx, &params, snr_db, b as u64)).collect::<Result<_>>()?;
        for r in batch {
            blocks += 1;
            errs1 += r.errs1;
            errs2 += r.errs2;
            outer += r.outer;
            events += (r.errs1 + r.errs2 > 0) as usize;
            if stop_events.is_some_and(|m| events >= m) {
                break 'outer;
            }
        }
    }
    let ber = |e: usize, k: usize| if k == 0 { 0.0 } else { e as f64 / (blocks * k) as f64 };
    Ok(BerPoint {
        snr_db,
        blocks,
        errs1,
        errs2,
        block_errors: events,
        ber1: ber(errs1, k1),
        ber2: ber(errs2, k2),
        ber_avg: ber(errs1 + errs2, k1 + k2),
        avg_outer_iters: outer as f64 / blocks as f64,
    })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start {workers} workers: {e}")))
}

/// Default worker count: available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// BER sweep over the experiment's SNR grid. When `sink` is given, each
/// point is appended and flushed as soon as it completes.
pub fn run_ber(exp: &Experiment, workers: usize, mut sink: Option<&mut CsvSink>) -> Result<Vec<BerPoint>> {
    exp.validate()?;
    let rx = Receiver::new(exp);
    let pool = pool(workers)?;
    let mut points = Vec::with_capacity(exp.snr_db.len());
    for &snr in &exp.snr_db {
        let p = pool.install(|| run_point(exp, &rx, snr, exp.max_blocks, Some(exp.min_error_events)))?;
        if let Some(s) = sink.as_deref_mut() {
            s.append(exp, &p)?;
        }
        points.push(p);
    }
    Ok(points)
}

/// Exactly [`RATE_TEST_BLOCKS`] blocks; true iff the pooled BER is below
/// [`RATE_TEST_BER`].
pub fn rate_achieved(exp: &Experiment, snr_db: f64, workers: usize) -> Result<bool> {
    exp.validate()?;
    let rx = Receiver::new(exp);
    let p = pool(workers)?.install(|| run_point(exp, &rx, snr_db, RATE_TEST_BLOCKS, None))?;
    Ok(p.ber_avg < RATE_TEST_BER)
}

/// One point at an arbitrary SNR with the experiment's stopping rule.
pub fn ber_at(exp: &Experiment, snr_db: f64, workers: usize) -> Result<BerPoint> {
    exp.validate()?;
    let rx = Receiver::new(exp);
    pool(workers)?.install(|| run_point(exp, &rx, snr_db, exp.max_blocks, Some(exp.min_error_events)))
}

/// SNR where the pooled BER falls through `target`, by bisection on
/// `[lo, hi]` until the bracket is narrower than `tol_db`. Returns the upper
/// end of the final bracket and every evaluated point.
pub fn bisect_waterfall(exp: &Experiment, lo: f64, hi: f64, target: f64, tol_db: f64, workers: usize) -> Result<(f64, Vec<BerPoint>)> {
    exp.validate()?;
    if !(lo < hi) || !(tol_db > 0.0) || !(target > 0.0) {
        return Err(Error::Parameter(format!("invalid bisection bracket [{lo}, {hi}] / {tol_db}")));
    }
    let rx = Receiver::new(exp);
    let pool = pool(workers)?;
    let eval = |s: f64| pool.install(|| run_point(exp, &rx, s, exp.max_blocks, Some(exp.min_error_events)));
    let mut trace = Vec::new();
    let p_lo = eval(lo)?;
    let p_hi = eval(hi)?;
    let (lo_ok, hi_ok) = (p_lo.ber_avg > target, p_hi.ber_avg <= target);
    trace.push(p_lo);
    trace.push(p_hi);
    if !(lo_ok && hi_ok) {
        return Err(Error::Parameter(format!(
            "target BER {target} not bracketed by [{lo}, {hi}] dB: {:?}",
            trace.iter().map(|p| p.ber_avg).collect::<Vec<_>>()
        )));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol_db {
        let m = 0.5 * (a + b);
        let p = eval(m)?;
        if p.ber_avg > target {
            a = m;
        } else {
            b = m;
        }
        trace.push(p);
    }
    Ok((b, trace))
}

/// Two-sided 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    // the closed form cancels to a rounding residue at k = 0 and k = n
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Pooled-BER interval of a point for an experiment's bit counts.
pub fn ber_interval(point: &BerPoint, info_bits: (usize, usize)) -> (f64, f64) {
    wilson_interval(point.errs1 + point.errs2, point.blocks * (info_bits.0 + info_bits.1))
}

#[cfg(test)]
mod tests;
