//! Mutual information and achievable rates for uniform BPSK on the
//! two-user real Gaussian channel.
//!
//! Every quantity is `I(class; y)` for a partition of the superimposed
//! constellation into classes, each class an equal-weight Gaussian
//! mixture. Expectations over `y` use Gauss-Hermite quadrature around each
//! component mean, optionally cross-checked by adaptive Simpson over the
//! real line. Values are in bits.

mod quadrature;

pub use quadrature::{adaptive_simpson, gauss_hermite};

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::channel::{eta_inv, ChannelParams};
use crate::error::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;
/// Allowed gap between the two quadrature rules.
pub const CROSS_CHECK_TOL: f64 = 1e-6;
/// Half-width of the Simpson window around each component mean, in noise
/// standard deviations.
const WINDOW_SIGMAS: f64 = 14.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

impl RatePoint {
    pub fn new(r1: f64, r2: f64) -> Self {
        RatePoint { r1, r2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadMethod {
    GaussHermite { nodes: usize },
    AdaptiveSimpson { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub method: QuadMethod,
    /// Also evaluate with the other rule and fail on disagreement.
    pub cross_check: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { method: QuadMethod::GaussHermite { nodes: 200 }, cross_check: true }
    }
}

/// A prepared quadrature rule.
#[derive(Debug, Clone)]
pub struct Quadrature {
    spec: QuadratureSpec,
    /// Scaled so that `sum w_i g(x_i) ~ E[g(Z)]` for standard normal `Z`.
    gh: (Vec<f64>, Vec<f64>),
    simpson_tol: f64,
}

impl Quadrature {
    pub fn new(spec: QuadratureSpec) -> Result<Self> {
        let (nodes, simpson_tol) = match spec.method {
            QuadMethod::GaussHermite { nodes } => (nodes, 1e-11),
            QuadMethod::AdaptiveSimpson { tol } => (200, tol),
        };
        if nodes == 0 || !(simpson_tol > 0.0) {
            return Err(Error::Parameter(format!("invalid quadrature {spec:?}")));
        }
        let (x, w) = gauss_hermite(nodes);
        let s2 = std::f64::consts::SQRT_2;
        let norm = 1.0 / std::f64::consts::PI.sqrt();
        Ok(Quadrature { spec, gh: (x.iter().map(|x| x * s2).collect(), w.iter().map(|w| w * norm).collect()), simpson_tol })
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// `sum_j a_j E[g(mu_j + sigma Z)]` over weighted components `(a_j, mu_j)`.
    fn expect<G: Fn(f64) -> f64>(&self, comps: &[(f64, f64)], sigma2: f64, g: G) -> Result<f64> {
        let gh = || self.expect_gh(comps, sigma2, &g);
        let simpson = || self.expect_simpson(comps, sigma2, &g);
        let (primary, other) = match self.spec.method {
            QuadMethod::GaussHermite { .. } => (gh(), self.spec.cross_check.then(simpson)),
            QuadMethod::AdaptiveSimpson { .. } => (simpson()?, self.spec.cross_check.then(|| Ok(gh()))),
        };
        if !primary.is_finite() {
            return Err(Error::Tolerance(format!("quadrature produced {primary}")));
        }
        if let Some(other) = other {
            let other = other?;
            if (primary - other).abs() > CROSS_CHECK_TOL {
                return Err(Error::Tolerance(format!("quadrature rules disagree: {primary} vs {other} (sigma2 = {sigma2})")));
            }
        }
        Ok(primary)
    }

    fn expect_gh<G: Fn(f64) -> f64>(&self, comps: &[(f64, f64)], sigma2: f64, g: &G) -> f64 {
        let sigma = sigma2.sqrt();
        let (x, w) = &self.gh;
        comps.iter().map(|&(a, mu)| a * x.iter().zip(w).map(|(x, w)| w * g(mu + sigma * x)).sum::<f64>()).sum()
    }

    fn expect_simpson<G: Fn(f64) -> f64>(&self, comps: &[(f64, f64)], sigma2: f64, g: &G) -> Result<f64> {
        let sigma = sigma2.sqrt();
        let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma2).sqrt();
        let density =
            |y: f64| -> f64 { comps.iter().map(|&(a, mu)| a * (-(y - mu) * (y - mu) / (2.0 * sigma2)).exp()).sum::<f64>() * norm };
        let f = |y: f64| {
            let d = density(y);
            if d == 0.0 {
                0.0
            } else {
                d * g(y)
            }
        };
        // Windows of +-h around each mean, merged, then split at the means.
        let mut means: Vec<f64> = comps.iter().map(|c| c.1).collect();
        means.sort_by(f64::total_cmp);
        means.dedup();
        let h = WINDOW_SIGMAS * sigma;
        let mut total = 0.0;
        let mut i = 0;
        while i < means.len() {
            let mut j = i;
            while j + 1 < means.len() && means[j + 1] - h <= means[j] + h {
                j += 1;
            }
            let mut cuts = vec![means[i] - h];
            cuts.extend_from_slice(&means[i..=j]);
            cuts.push(means[j] + h);
            for w in cuts.windows(2) {
                if w[1] > w[0] {
                    total += adaptive_simpson(&f, w[0], w[1], self.simpson_tol)?;
                }
            }
            i = j + 1;
        }
        Ok(total)
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::new(QuadratureSpec::default()).expect("default quadrature is valid")
    }
}

/// A partition of constellation points into equiprobable-within-class
/// mixtures with class priors.
#[derive(Debug, Clone)]
struct Partition {
    classes: Vec<(f64, Vec<f64>)>,
    sigma2: f64,
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl Partition {
    /// `ln f_k(y)` up to the Gaussian normalizer shared by every class.
    fn ln_class(&self, k: usize, y: f64) -> f64 {
        let (_, means) = &self.classes[k];
        let s = -0.5 / self.sigma2;
        log_sum_exp(means.iter().map(|m| s * (y - m) * (y - m))) - (means.len() as f64).ln()
    }

    fn ln_total(&self, y: f64) -> f64 {
        log_sum_exp(self.classes.iter().enumerate().map(|(k, (p, _))| p.ln() + self.ln_class(k, y)))
    }

    fn components(&self, k: usize) -> Vec<(f64, f64)> {
        let (p, means) = &self.classes[k];
        means.iter().map(|&m| (p / means.len() as f64, m)).collect()
    }

    fn mi(&self, q: &Quadrature) -> Result<f64> {
        let mut total = 0.0;
        for k in 0..self.classes.len() {
            total += q.expect(&self.components(k), self.sigma2, |y| self.ln_class(k, y) - self.ln_total(y))?;
        }
        Ok((total / LN2).max(0.0))
    }

    /// One sample of `log2 f_k(y) / f(y)` with `(k, y)` drawn jointly.
    fn mc_sample<R: Rng + ?Sized>(&self, rng: &mut R, noise: &Normal<f64>) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut k = self.classes.len() - 1;
        for (i, (p, _)) in self.classes.iter().enumerate() {
            acc += p;
            if u < acc {
                k = i;
                break;
            }
        }
        let means = &self.classes[k].1;
        let mu = means[rng.random_range(0..means.len())];
        let y = mu + noise.sample(rng);
        (self.ln_class(k, y) - self.ln_total(y)) / LN2
    }
}

/// Mutual information targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// `I(x1, x2; y)`.
    Joint,
    /// `I(x_u; y | x_other)`.
    Conditional(u8),
    /// `I(x_u; y)` with the other user as interference.
    Single(u8),
    /// `I(x1 ^ x2; y)`.
    Nc,
}

impl Quantity {
    pub fn name(&self) -> String {
        match self {
            Quantity::Joint => "I_x1x2_y".into(),
            Quantity::Conditional(1) => "I_x1_y_given_x2".into(),
            Quantity::Conditional(_) => "I_x2_y_given_x1".into(),
            Quantity::Single(u) => format!("I_x{u}_y"),
            Quantity::Nc => "I_c_y".into(),
        }
    }
}

fn check_user(user: u8) -> Result<()> {
    if user == 1 || user == 2 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("user must be 1 or 2, got {user}")))
    }
}

/// Symbols grouped by a labelling of `(b1, b2)`.
fn partition_by(params: &ChannelParams, label: impl Fn(u8, u8) -> usize, n_classes: usize) -> Partition {
    let mut classes: Vec<(f64, Vec<f64>)> = vec![(0.0, Vec::new()); n_classes];
    for (o, &x) in params.superimposed().iter().enumerate() {
        let (b1, b2) = eta_inv(o);
        let c = &mut classes[label(b1, b2)];
        c.0 += 0.25;
        c.1.push(x);
    }
    Partition { classes, sigma2: params.sigma2 }
}

/// Two singleton classes `gain * (+-1) + offset`.
fn bpsk_partition(gain: f64, offset: f64, sigma2: f64) -> Partition {
    Partition { classes: vec![(0.5, vec![offset + gain]), (0.5, vec![offset - gain])], sigma2 }
}

fn partitions(params: &ChannelParams, quantity: Quantity) -> Result<Vec<(f64, Partition)>> {
    Ok(match quantity {
        Quantity::Joint => vec![(1.0, partition_by(params, |b1, b2| 2 * b1 as usize + b2 as usize, 4))],
        Quantity::Conditional(u) => {
            check_user(u)?;
            let (own, other) = if u == 1 { (params.h1, params.h2) } else { (params.h2, params.h1) };
            vec![(0.5, bpsk_partition(own, other, params.sigma2)), (0.5, bpsk_partition(own, -other, params.sigma2))]
        }
        Quantity::Single(u) => {
            check_user(u)?;
            vec![(1.0, partition_by(params, move |b1, b2| if u == 1 { b1 as usize } else { b2 as usize }, 2))]
        }
        Quantity::Nc => vec![(1.0, partition_by(params, |b1, b2| (b1 ^ b2) as usize, 2))],
    })
}

pub fn mutual_information(params: &ChannelParams, quantity: Quantity, q: &Quadrature) -> Result<f64> {
    let mut total = 0.0;
    for (w, p) in partitions(params, quantity)? {
        total += w * p.mi(q)?;
    }
    Ok(total)
}

pub fn mi_joint(params: &ChannelParams, q: &Quadrature) -> Result<f64> {
    mutual_information(params, Quantity::Joint, q)
}

pub fn mi_conditional(params: &ChannelParams, user: u8, q: &Quadrature) -> Result<f64> {
    mutual_information(params, Quantity::Conditional(user), q)
}

pub fn mi_single(params: &ChannelParams, user: u8, q: &Quadrature) -> Result<f64> {
    mutual_information(params, Quantity::Single(user), q)
}

pub fn mi_nc(params: &ChannelParams, q: &Quadrature) -> Result<f64> {
    mutual_information(params, Quantity::Nc, q)
}

/// Monte Carlo estimate `(mean, standard error)`.
pub fn mi_monte_carlo<R: Rng + ?Sized>(params: &ChannelParams, quantity: Quantity, samples: usize, rng: &mut R) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::Parameter("at least two samples are needed".into()));
    }
    let noise = Normal::new(0.0, params.sigma2.sqrt()).map_err(|e| Error::Parameter(e.to_string()))?;
    let parts = partitions(params, quantity)?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        // conditioning partitions are equiprobable
        let p = &parts[rng.random_range(0..parts.len())].1;
        let s = p.mc_sample(rng, &noise);
        sum += s;
        sum_sq += s * s;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// `H(x1, x2 | y, c)`: expected entropy of the within-class posterior.
pub fn joint_entropy_given_nc(params: &ChannelParams, q: &Quadrature) -> Result<f64> {
    let p = partition_by(params, |b1, b2| (b1 ^ b2) as usize, 2);
    let s = -0.5 / params.sigma2;
    let mut total = 0.0;
    for k in 0..2 {
        let means = p.classes[k].1.clone();
        let h = |y: f64| {
            let l: Vec<f64> = means.iter().map(|m| s * (y - m) * (y - m)).collect();
            let z = log_sum_exp(l.iter().copied());
            -l.iter()
                .map(|li| {
                    let lp = li - z;
                    if lp == f64::NEG_INFINITY {
                        0.0
                    } else {
                        lp.exp() * lp
                    }
                })
                .sum::<f64>()
        };
        total += q.expect(&p.components(k), params.sigma2, h)?;
    }
    Ok((total / LN2).max(0.0))
}

/// Corner points `(C1, I(x2;y))` and `(I(x1;y), C2)` and the axes, in order
/// `(0,0), (C1,0), (C1, I(x2;y)), (I(x1;y), C2), (0, C2)`.
pub fn capacity_region(params: &ChannelParams, q: &Quadrature) -> Result<Vec<RatePoint>> {
    let c1 = mi_conditional(params, 1, q)?;
    let c2 = mi_conditional(params, 2, q)?;
    let s1 = mi_single(params, 1, q)?;
    let s2 = mi_single(params, 2, q)?;
    Ok(vec![RatePoint::new(0.0, 0.0), RatePoint::new(c1, 0.0), RatePoint::new(c1, s2), RatePoint::new(s1, c2), RatePoint::new(0.0, c2)])
}

/// Membership in a pentagon returned by [`capacity_region`], with slack `eps`.
pub fn pentagon_contains(vertices: &[RatePoint], p: RatePoint, eps: f64) -> bool {
    let c1 = vertices[1].r1;
    let c2 = vertices[4].r2;
    let sum = 0.5 * (vertices[2].r1 + vertices[2].r2 + vertices[3].r1 + vertices[3].r2);
    p.r1 >= -eps && p.r2 >= -eps && p.r1 <= c1 + eps && p.r2 <= c2 + eps && p.r1 + p.r2 <= sum + eps
}

/// Network-coding map `c = a1 x1 + a2 x2`; only GF(2) with `a1 = a2 = 1`
/// is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NcMapping {
    pub a1: u8,
    pub a2: u8,
}

impl Default for NcMapping {
    fn default() -> Self {
        NcMapping { a1: 1, a2: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Terms {
    /// `H(c | y) = 1 - I(c; y)`.
    pub h_c_given_y: f64,
    /// `H(x1, x2 | y, c)`.
    pub h_x_given_y_c: f64,
}

pub fn theorem1_terms(params: &ChannelParams, mapping: NcMapping, q: &Quadrature) -> Result<Theorem1Terms> {
    if mapping != NcMapping::default() {
        return Err(Error::Parameter(format!("only a1 = a2 = 1 over GF(2) is supported, got {mapping:?}")));
    }
    Ok(Theorem1Terms { h_c_given_y: (1.0 - mi_nc(params, q)?).clamp(0.0, 1.0), h_x_given_y_c: joint_entropy_given_nc(params, q)? })
}

/// Upper corners of the two achievable rate boxes; each box is
/// `[0, r1] x [0, r2]`. The first favours user 1 decoding through the
/// residual term, the second is its mirror.
pub fn theorem1_region(params: &ChannelParams, mapping: NcMapping, q: &Quadrature) -> Result<Vec<RatePoint>> {
    let t = theorem1_terms(params, mapping, q)?;
    // H(x1) = H(x2) = 1 for uniform binary inputs.
    let worst = t.h_c_given_y.max(t.h_x_given_y_c);
    Ok(vec![RatePoint::new((1.0 - worst).max(0.0), 1.0 - t.h_c_given_y), RatePoint::new(1.0 - t.h_c_given_y, (1.0 - worst).max(0.0))])
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoRow {
    pub snr_db: f64,
    pub h1: f64,
    pub h2: f64,
    pub quantity: String,
    pub value: f64,
}

/// Every quantity at one channel point.
pub fn evaluate_point(params: &ChannelParams, q: &Quadrature) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for quantity in
        [Quantity::Joint, Quantity::Conditional(1), Quantity::Conditional(2), Quantity::Single(1), Quantity::Single(2), Quantity::Nc]
    {
        out.push((quantity.name(), mutual_information(params, quantity, q)?));
    }
    // the two conditional terms are C1 and C2
    let min_c = out[1].1.min(out[2].1);
    out.push(("min_C1_C2".into(), min_c));
    let t = theorem1_terms(params, NcMapping::default(), q)?;
    out.push(("H_c_given_y".into(), t.h_c_given_y));
    out.push(("H_x1x2_given_y_c".into(), t.h_x_given_y_c));
    let boxes = theorem1_region(params, NcMapping::default(), q)?;
    out.push(("thm1a_R1".into(), boxes[0].r1));
    out.push(("thm1a_R2".into(), boxes[0].r2));
    out.push(("thm1b_R1".into(), boxes[1].r1));
    out.push(("thm1b_R2".into(), boxes[1].r2));
    Ok(out)
}

/// Evaluates every `(gains, snr)` combination in parallel; rows come out in
/// input order.
pub fn sweep(gains: &[(f64, f64)], snrs_db: &[f64], q: &Quadrature) -> Result<Vec<InfoRow>> {
    let points: Vec<(f64, f64, f64)> = gains.iter().flat_map(|&(h1, h2)| snrs_db.iter().map(move |&s| (h1, h2, s))).collect();
    let per_point: Vec<Result<Vec<InfoRow>>> = points
        .par_iter()
        .map(|&(h1, h2, snr_db)| {
            let params = ChannelParams::from_snr_db(h1, h2, snr_db)?;
            Ok(evaluate_point(&params, q)?.into_iter().map(|(quantity, value)| InfoRow { snr_db, h1, h2, quantity, value }).collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "snr_db,h1,h2,quantity_name,value";

pub fn write_csv(path: &Path, rows: &[InfoRow]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let mut emit = || -> std::io::Result<()> {
        writeln!(f, "{CSV_HEADER}")?;
        for r in rows {
            writeln!(f, "{},{},{},{},{:.12}", r.snr_db, r.h1, r.h2, r.quantity, r.value)?;
        }
        f.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests;
