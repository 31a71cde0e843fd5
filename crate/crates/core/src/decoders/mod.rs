//! Message-passing receivers for the two-user channel.
//!
//! [`RdjdDecoder`] alternates a 4-ary joint decoder over the common checks
//! with a binary decoder of user 2 over the residual checks. The two-step
//! network-coded receiver and successive cancellation serve as baselines.

mod bp;
mod graph;
mod jud;
mod kernels;

pub use bp::{clamp_llr, hard, llr_to_pmf, pmf_to_llr, rud_decode, BpDecoder, BpOutput, LLR_CLAMP};
pub use graph::TannerGraph;
pub use jud::{jud_decode, marginalize_user1, marginalize_user2, JudDecoder, JudOutput};
pub use kernels::{chk_combine, chk_combine_all, var_combine, var_combine_all, var_combine_counted};

use crate::binmat::{BinMatrix, BinVector};
use crate::channel::{bpsk, bpsk_llr, conditional_llr, joint_channel_probs, nc_llr, single_user_llr, ChannelParams, JointPmf};
use crate::codes::CodePair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RdjdConfig {
    pub outer_iters: usize,
    pub jud_inner_iters: usize,
    pub rud_inner_iters: usize,
    pub early_stop: bool,
    /// Divide the fed-back prior out of user 2's marginals before RUD.
    pub extrinsic_to_rud: bool,
}

impl Default for RdjdConfig {
    fn default() -> Self {
        RdjdConfig { outer_iters: 5, jud_inner_iters: 30, rud_inner_iters: 30, early_stop: true, extrinsic_to_rud: true }
    }
}

impl RdjdConfig {
    /// JUD alone: a single outer round.
    pub fn non_iterative() -> Self {
        RdjdConfig { outer_iters: 1, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.outer_iters == 0 || self.jud_inner_iters == 0 || self.rud_inner_iters == 0 {
            return Err(Error::Parameter(format!("iteration counts must be at least 1: {self:?}")));
        }
        Ok(())
    }
}

/// Per-block decoder result.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub c1_hat: BinVector,
    pub c2_hat: BinVector,
    /// `c1_hat` satisfies every row of H1.
    pub converged1: bool,
    /// `c2_hat` satisfies every row of H2.
    pub converged2: bool,
    pub outer_iters_used: usize,
    pub inner_iters_used: usize,
    pub contradictions: usize,
    pub bit_errors1: Option<usize>,
    pub bit_errors2: Option<usize>,
}

impl DecodeOutcome {
    fn new(c1: Vec<u8>, c2: Vec<u8>, h1: &TannerGraph, h2: &TannerGraph) -> Self {
        let converged1 = h1.satisfied(&c1);
        let converged2 = h2.satisfied(&c2);
        DecodeOutcome {
            c1_hat: BinVector::from_bits(c1),
            c2_hat: BinVector::from_bits(c2),
            converged1,
            converged2,
            outer_iters_used: 1,
            inner_iters_used: 0,
            contradictions: 0,
            bit_errors1: None,
            bit_errors2: None,
        }
    }

    /// Records codeword bit errors against the transmitted pair.
    pub fn score(mut self, c1: &BinVector, c2: &BinVector) -> Self {
        self.bit_errors1 = Some(self.c1_hat.hamming_distance(c1));
        self.bit_errors2 = Some(self.c2_hat.hamming_distance(c2));
        self
    }
}

fn check_len(y: &[f64], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::Dimension { expected: n, found: y.len() });
    }
    Ok(())
}

/// Iterative joint decoder with graphs prepared once per code pair.
#[derive(Debug, Clone)]
pub struct RdjdDecoder {
    jud: JudDecoder,
    rud: BpDecoder,
    h1: TannerGraph,
    h2: TannerGraph,
}

/// Soft state after one JUD activation, as seen by the outer loop.
#[derive(Debug, Clone)]
pub struct OuterRound {
    pub jud: JudOutput,
    /// Prior on user 2 fed into this JUD activation.
    pub prior2: Vec<[f64; 2]>,
}

impl RdjdDecoder {
    pub fn new(pair: &CodePair) -> Self {
        RdjdDecoder {
            jud: JudDecoder::new(&pair.hc),
            rud: BpDecoder::new(&pair.ha),
            h1: TannerGraph::new(&pair.h1),
            h2: TannerGraph::new(&pair.h2),
        }
    }

    pub fn jud(&self) -> &JudDecoder {
        &self.jud
    }

    pub fn rud(&self) -> &BpDecoder {
        &self.rud
    }

    /// User 2 input to RUD from one JUD round, as LLRs.
    pub fn rud_input(round: &OuterRound, extrinsic: bool) -> Vec<f64> {
        round
            .jud
            .w
            .iter()
            .zip(&round.prior2)
            .map(|(w, e)| {
                let l = pmf_to_llr(w.user2());
                if extrinsic {
                    clamp_llr(l - pmf_to_llr(*e))
                } else {
                    l
                }
            })
            .collect()
    }

    pub fn decode(&self, y: &[f64], params: &ChannelParams, cfg: &RdjdConfig) -> Result<DecodeOutcome> {
        cfg.validate()?;
        check_len(y, self.h1.n_vars())?;
        let p_ch: Vec<JointPmf> = y.iter().map(|&v| joint_channel_probs(v, params)).collect();
        Ok(self.decode_pmf(&p_ch, cfg))
    }

    pub fn decode_pmf(&self, p_ch: &[JointPmf], cfg: &RdjdConfig) -> DecodeOutcome {
        let n = p_ch.len();
        let mut prior2 = vec![[0.5, 0.5]; n];
        let mut inner = 0;
        let mut contradictions = 0;
        let mut outer = 0;
        loop {
            outer += 1;
            let jud = self.jud.decode(p_ch, Some(&prior2), cfg.jud_inner_iters, cfg.early_stop);
            inner += jud.iters;
            contradictions += jud.contradictions;
            let done = cfg.early_stop && self.h1.satisfied(&jud.c1) && self.h2.satisfied(&jud.c2);
            if done || outer == cfg.outer_iters {
                let mut out = DecodeOutcome::new(jud.c1, jud.c2, &self.h1, &self.h2);
                out.outer_iters_used = outer;
                out.inner_iters_used = inner;
                out.contradictions = contradictions;
                return out;
            }
            let round = OuterRound { jud, prior2 };
            let a = Self::rud_input(&round, cfg.extrinsic_to_rud);
            let rud = self.rud.decode(&a, cfg.rud_inner_iters, cfg.early_stop);
            inner += rud.iters;
            prior2 = rud.extrinsic.into_iter().map(llr_to_pmf).collect();
        }
    }
}

pub fn rdjd_decode(y: &[f64], pair: &CodePair, params: &ChannelParams, cfg: &RdjdConfig) -> Result<DecodeOutcome> {
    RdjdDecoder::new(pair).decode(y, params, cfg)
}

/// Two-step receiver: decode `c1 ^ c2` over Hc, then `c1` over H1 given it.
#[derive(Debug, Clone)]
pub struct XorCdDecoder {
    nc: BpDecoder,
    user1: BpDecoder,
    h2: TannerGraph,
}

impl XorCdDecoder {
    pub fn new(pair: &CodePair) -> Self {
        XorCdDecoder { nc: BpDecoder::new(&pair.hc), user1: BpDecoder::new(&pair.h1), h2: TannerGraph::new(&pair.h2) }
    }

    /// `iters` per step.
    pub fn decode(&self, y: &[f64], params: &ChannelParams, iters: usize) -> Result<DecodeOutcome> {
        check_len(y, self.h2.n_vars())?;
        let llr: Vec<f64> = y.iter().map(|&v| nc_llr(v, params)).collect();
        let step1 = self.nc.decode(&llr, iters, true);
        let side: Vec<f64> = y.iter().zip(&step1.hard).map(|(&v, &c)| conditional_llr(v, params, c)).collect();
        let step2 = self.user1.decode(&side, iters, true);
        let c2: Vec<u8> = step2.hard.iter().zip(&step1.hard).map(|(a, b)| a ^ b).collect();
        let mut out = DecodeOutcome::new(step2.hard, c2, self.user1.graph(), &self.h2);
        out.inner_iters_used = step1.iters + step2.iters;
        Ok(out)
    }
}

pub fn xorcd_decode(y: &[f64], pair: &CodePair, params: &ChannelParams, iters: usize) -> Result<DecodeOutcome> {
    XorCdDecoder::new(pair).decode(y, params, iters)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SicOrder {
    /// User 1 first; gains are ordered `|h1| >= |h2|`.
    #[default]
    StrongFirst,
}

/// Successive cancellation: user 1 with marginal LLRs, then user 2 on the
/// residual signal.
#[derive(Debug, Clone)]
pub struct SicDecoder {
    user1: BpDecoder,
    user2: BpDecoder,
}

impl SicDecoder {
    pub fn new(pair: &CodePair) -> Self {
        SicDecoder { user1: BpDecoder::new(&pair.h1), user2: BpDecoder::new(&pair.h2) }
    }

    pub fn decode(&self, y: &[f64], params: &ChannelParams, iters: usize, _order: SicOrder) -> Result<DecodeOutcome> {
        check_len(y, self.user1.graph().n_vars())?;
        let llr1: Vec<f64> = y.iter().map(|&v| single_user_llr(v, params, 1)).collect();
        let s1 = self.user1.decode(&llr1, iters, true);
        let llr2: Vec<f64> = y.iter().zip(&s1.hard).map(|(&v, &b)| bpsk_llr(v - params.h1 * bpsk(b), params.h2, params.sigma2)).collect();
        let s2 = self.user2.decode(&llr2, iters, true);
        let mut out = DecodeOutcome::new(s1.hard, s2.hard, self.user1.graph(), self.user2.graph());
        out.inner_iters_used = s1.iters + s2.iters;
        Ok(out)
    }
}

pub fn sic_decode(y: &[f64], pair: &CodePair, params: &ChannelParams, iters: usize, order: SicOrder) -> Result<DecodeOutcome> {
    SicDecoder::new(pair).decode(y, params, iters, order)
}

/// Point-to-point reference: BPSK over AWGN with gain `gain`.
pub fn single_user_decode(y: &[f64], h: &BinMatrix, gain: f64, sigma2: f64, iters: usize) -> Result<BpOutput> {
    check_len(y, h.n_cols())?;
    let llr: Vec<f64> = y.iter().map(|&v| bpsk_llr(v, gain, sigma2)).collect();
    Ok(BpDecoder::new(h).decode(&llr, iters, true))
}
