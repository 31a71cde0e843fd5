//! Joint decoding of both users' bits as 4-ary symbols over the common checks.

use super::graph::TannerGraph;
use super::kernels::{conv, mul};
use crate::binmat::BinMatrix;
use crate::channel::{eta_inv, JointPmf};

#[derive(Debug, Clone)]
pub struct JudOutput {
    /// A-posteriori symbol PMFs.
    pub w: Vec<JointPmf>,
    pub c1: Vec<u8>,
    pub c2: Vec<u8>,
    /// Both hard decisions satisfy every common check.
    pub satisfied: bool,
    pub iters: usize,
    pub contradictions: usize,
}

/// 4-ary flooding sum-product over a fixed graph.
///
/// Check updates convolve over Z2 x Z2 and variable updates multiply with
/// sum renormalization. Exclusion of the target edge uses prefix and suffix
/// products, so zeros need no division and every term stays nonnegative.
#[derive(Debug, Clone)]
pub struct JudDecoder {
    graph: TannerGraph,
    max_check_deg: usize,
    max_var_deg: usize,
}

#[inline]
fn normalize(p: &mut [f64; 4]) -> bool {
    let s = p[0] + p[1] + p[2] + p[3];
    if s > 0.0 && s.is_finite() {
        let inv = 1.0 / s;
        for x in p.iter_mut() {
            *x *= inv;
        }
        true
    } else {
        false
    }
}

impl JudDecoder {
    pub fn new(hc: &BinMatrix) -> Self {
        let graph = TannerGraph::new(hc);
        let max_check_deg = (0..graph.n_checks()).map(|r| graph.check_range(r).len()).max().unwrap_or(0);
        let max_var_deg = (0..graph.n_vars()).map(|v| graph.var_edges(v).len()).max().unwrap_or(0);
        JudDecoder { graph, max_check_deg, max_var_deg }
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    /// Combines channel PMFs with per-bit priors on user 2.
    pub fn intrinsic(p_ch: &[JointPmf], prior2: Option<&[[f64; 2]]>, contradictions: &mut usize) -> Vec<[f64; 4]> {
        p_ch.iter()
            .enumerate()
            .map(|(i, p)| {
                let mut q = p.0;
                if let Some(e) = prior2 {
                    for (o, x) in q.iter_mut().enumerate() {
                        *x *= e[i][eta_inv(o).1 as usize];
                    }
                }
                if !normalize(&mut q) {
                    *contradictions += 1;
                    q = [0.25; 4];
                }
                q
            })
            .collect()
    }

    /// Runs up to `iters` flooding iterations. `prior2[i]` is `[P(0), P(1)]`
    /// for user 2's bit `i`; `None` means uniform.
    pub fn decode(&self, p_ch: &[JointPmf], prior2: Option<&[[f64; 2]]>, iters: usize, early_stop: bool) -> JudOutput {
        let g = &self.graph;
        let n = g.n_vars();
        assert_eq!(p_ch.len(), n, "channel PMFs must cover every column");
        if let Some(e) = prior2 {
            assert_eq!(e.len(), n, "priors must cover every column");
        }
        let mut contradictions = 0usize;
        let intrinsic = Self::intrinsic(p_ch, prior2, &mut contradictions);

        let mut v2c: Vec<[f64; 4]> = (0..g.n_edges()).map(|e| intrinsic[g.edge_var(e)]).collect();
        let mut c2v: Vec<[f64; 4]> = vec![[0.25; 4]; g.n_edges()];
        let mut w: Vec<[f64; 4]> = intrinsic.clone();
        let mut c1 = vec![0u8; n];
        let mut c2 = vec![0u8; n];

        let decide = |w: &[[f64; 4]], c1: &mut [u8], c2: &mut [u8]| {
            for (i, p) in w.iter().enumerate() {
                let (b1, b2) = eta_inv(JointPmf(*p).argmax());
                c1[i] = b1;
                c2[i] = b2;
            }
        };
        decide(&w, &mut c1, &mut c2);
        let mut satisfied = g.satisfied(&c1) && g.satisfied(&c2);
        let mut used = 0;

        let mut fwd = vec![[0.0f64; 4]; self.max_check_deg.max(self.max_var_deg) + 1];

        while used < iters && !(early_stop && satisfied && used > 0) {
            used += 1;
            for r in 0..g.n_checks() {
                let range = g.check_range(r);
                let d = range.len();
                fwd[0] = [1.0, 0.0, 0.0, 0.0];
                for (k, e) in range.clone().enumerate() {
                    fwd[k + 1] = conv(&fwd[k], &v2c[e]);
                }
                let mut bwd = [1.0f64, 0.0, 0.0, 0.0];
                for k in (0..d).rev() {
                    let e = range.start + k;
                    let mut out = conv(&fwd[k], &bwd);
                    normalize(&mut out);
                    bwd = conv(&bwd, &v2c[e]);
                    c2v[e] = out;
                }
            }
            for v in 0..n {
                let edges = g.var_edges(v);
                let d = edges.len();
                fwd[0] = intrinsic[v];
                for (k, &e) in edges.iter().enumerate() {
                    let mut p = mul(&fwd[k], &c2v[e as usize]);
                    if !normalize(&mut p) {
                        p = [0.0; 4];
                    }
                    fwd[k + 1] = p;
                }
                let mut post = fwd[d];
                if !normalize(&mut post) {
                    contradictions += 1;
                    post = [0.25; 4];
                }
                w[v] = post;
                let mut bwd = [1.0f64; 4];
                for k in (0..d).rev() {
                    let e = edges[k] as usize;
                    let mut out = mul(&fwd[k], &bwd);
                    if !normalize(&mut out) {
                        contradictions += 1;
                        out = [0.25; 4];
                    }
                    v2c[e] = out;
                    bwd = mul(&bwd, &c2v[e]);
                    let s = bwd[0] + bwd[1] + bwd[2] + bwd[3];
                    if s > 0.0 {
                        bwd = bwd.map(|x| x / s);
                    }
                }
            }
            decide(&w, &mut c1, &mut c2);
            satisfied = g.satisfied(&c1) && g.satisfied(&c2);
        }

        JudOutput { w: w.into_iter().map(JointPmf).collect(), c1, c2, satisfied, iters: used, contradictions }
    }
}

/// One-shot JUD over `hc` with early stopping.
pub fn jud_decode(p_ch: &[JointPmf], prior2: Option<&[[f64; 2]]>, hc: &BinMatrix, iters: usize) -> JudOutput {
    JudDecoder::new(hc).decode(p_ch, prior2, iters, true)
}

/// Per-bit PMFs of user 2: `[w0 + w2, w1 + w3]`.
pub fn marginalize_user2(w: &[JointPmf]) -> Vec<[f64; 2]> {
    w.iter().map(JointPmf::user2).collect()
}

/// Per-bit PMFs of user 1: `[w0 + w1, w2 + w3]`.
pub fn marginalize_user1(w: &[JointPmf]) -> Vec<[f64; 2]> {
    w.iter().map(JointPmf::user1).collect()
}
