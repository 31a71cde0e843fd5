//! Gauss-Hermite nodes and adaptive Simpson integration.

use crate::error::{Error, Result};

/// Orthonormal Hermite values `(p_n(z), p_{n-1}(z))` without the Gaussian
/// factor.
fn hermite_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = std::f64::consts::PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, p2)
}

/// Nodes `x_i` and weights `w_i` with `sum w_i f(x_i) ~ int e^{-x^2} f(x) dx`.
///
/// Positive roots are bracketed by sign changes on a grid finer than the
/// smallest root spacing, then bisected to machine precision.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let nf = n as f64;
    let weight = |z: f64| {
        let (_, pm1) = hermite_pair(n, z);
        let pp = (2.0 * nf).sqrt() * pm1;
        2.0 / (pp * pp)
    };
    // spacing near the origin is about pi / sqrt(2n + 1)
    let step = 0.1 * std::f64::consts::PI / (2.0 * nf + 1.0).sqrt();
    let top = (2.0 * nf + 1.0).sqrt() + 1.0;
    let mut pos = Vec::with_capacity(n / 2);
    let mut a = 0.5 * step;
    let mut fa = hermite_pair(n, a).0;
    while a < top && pos.len() < n / 2 {
        let b = a + step;
        let fb = hermite_pair(n, b).0;
        if fa == 0.0 || fa.signum() != fb.signum() {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = hermite_pair(n, mid).0;
                if fm.signum() == flo.signum() && fm != 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            pos.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    assert_eq!(pos.len(), n / 2, "failed to bracket every Hermite root");
    let mut x: Vec<f64> = pos.iter().rev().map(|z| -z).collect();
    if n % 2 == 1 {
        x.push(0.0);
    }
    x.extend(pos.iter().copied());
    let w = x.iter().map(|&z| weight(z.abs())).collect();
    (x, w)
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut budget = 2_000_000usize;
    let v = simpson_step(f, a, b, fa, fm, fb, whole, tol, 50, &mut budget);
    if budget == 0 || !v.is_finite() {
        return Err(Error::Tolerance(format!("adaptive Simpson did not converge on [{a}, {b}]")));
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    budget: &mut usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *budget = budget.saturating_sub(2);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || *budget == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget)
}
