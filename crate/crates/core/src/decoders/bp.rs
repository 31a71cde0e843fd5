//! Binary sum-product in the LLR domain (`L = ln P(0)/P(1)`).

use super::graph::TannerGraph;
use crate::binmat::BinMatrix;

/// Magnitude bound for channel, a-priori and extrinsic LLRs.
pub const LLR_CLAMP: f64 = 50.0;
const TANH_BOUND: f64 = 1.0 - 1e-15;

#[inline]
pub fn clamp_llr(l: f64) -> f64 {
    if l.is_nan() {
        0.0
    } else {
        l.clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}

/// LLR of a binary PMF `[P(0), P(1)]`, clamped.
#[inline]
pub fn pmf_to_llr(p: [f64; 2]) -> f64 {
    clamp_llr(p[0].ln() - p[1].ln())
}

#[inline]
pub fn llr_to_pmf(l: f64) -> [f64; 2] {
    [1.0 / (1.0 + (-l).exp()), 1.0 / (1.0 + l.exp())]
}

#[inline]
pub fn hard(l: f64) -> u8 {
    (l < 0.0) as u8
}

#[derive(Debug, Clone)]
pub struct BpOutput {
    pub posterior: Vec<f64>,
    /// Posterior minus input, clamped.
    pub extrinsic: Vec<f64>,
    pub hard: Vec<u8>,
    pub satisfied: bool,
    pub iters: usize,
}

/// Flooding binary SPA with the tanh check rule.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    graph: TannerGraph,
    max_check_deg: usize,
}

impl BpDecoder {
    pub fn new(h: &BinMatrix) -> Self {
        let graph = TannerGraph::new(h);
        let max_check_deg = (0..graph.n_checks()).map(|r| graph.check_range(r).len()).max().unwrap_or(0);
        BpDecoder { graph, max_check_deg }
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    pub fn decode(&self, llr: &[f64], iters: usize, early_stop: bool) -> BpOutput {
        let g = &self.graph;
        let n = g.n_vars();
        assert_eq!(llr.len(), n, "one LLR per column");
        let input: Vec<f64> = llr.iter().map(|&l| clamp_llr(l)).collect();
        let mut v2c: Vec<f64> = (0..g.n_edges()).map(|e| input[g.edge_var(e)]).collect();
        let mut c2v = vec![0.0f64; g.n_edges()];
        let mut posterior = input.clone();
        let mut bits: Vec<u8> = posterior.iter().map(|&l| hard(l)).collect();
        let mut satisfied = g.satisfied(&bits);
        let mut used = 0;
        let mut fwd = vec![0.0f64; self.max_check_deg + 1];
        let mut t = vec![0.0f64; self.max_check_deg];

        while used < iters && !(early_stop && satisfied && used > 0) {
            used += 1;
            for r in 0..g.n_checks() {
                let range = g.check_range(r);
                let d = range.len();
                for (k, e) in range.clone().enumerate() {
                    t[k] = (0.5 * v2c[e]).tanh();
                }
                fwd[0] = 1.0;
                for k in 0..d {
                    fwd[k + 1] = fwd[k] * t[k];
                }
                let mut bwd = 1.0;
                for k in (0..d).rev() {
                    let prod = (fwd[k] * bwd).clamp(-TANH_BOUND, TANH_BOUND);
                    c2v[range.start + k] = 2.0 * prod.atanh();
                    bwd *= t[k];
                }
            }
            for v in 0..n {
                let edges = g.var_edges(v);
                let total = input[v] + edges.iter().map(|&e| c2v[e as usize]).sum::<f64>();
                posterior[v] = total;
                for &e in edges {
                    v2c[e as usize] = clamp_llr(total - c2v[e as usize]);
                }
                bits[v] = hard(total);
            }
            satisfied = g.satisfied(&bits);
        }

        let extrinsic = posterior.iter().zip(&input).map(|(p, i)| clamp_llr(p - i)).collect();
        BpOutput { posterior, extrinsic, hard: bits, satisfied, iters: used }
    }
}

/// Residual decoding of user 2: binary SPA over `ha` with prior PMFs `a`,
/// returning extrinsic PMFs with the prior divided out.
pub fn rud_decode(a: &[[f64; 2]], ha: &BinMatrix, iters: usize) -> Vec<[f64; 2]> {
    let llr: Vec<f64> = a.iter().map(|&p| pmf_to_llr(p)).collect();
    BpDecoder::new(ha).decode(&llr, iters, true).extrinsic.into_iter().map(llr_to_pmf).collect()
}
