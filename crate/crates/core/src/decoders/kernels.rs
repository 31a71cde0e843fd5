//! Node rules for 4-ary messages over the group Z2 x Z2.

use crate::channel::JointPmf;

/// Z2 x Z2 convolution of raw weight arrays.
#[inline]
pub(crate) fn conv(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] + a[3] * b[2],
        a[0] * b[2] + a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0],
    ]
}

#[inline]
pub(crate) fn mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [a[0] * b[0], a[1] * b[1], a[2] * b[2], a[3] * b[3]]
}

/// Componentwise product, renormalized. `None` when the product vanishes.
pub fn var_combine(a: &JointPmf, b: &JointPmf) -> Option<JointPmf> {
    JointPmf::from_weights(mul(&a.0, &b.0))
}

/// Like [`var_combine`] but resolves contradictions to uniform and counts them.
pub fn var_combine_counted(a: &JointPmf, b: &JointPmf, contradictions: &mut usize) -> JointPmf {
    var_combine(a, b).unwrap_or_else(|| {
        *contradictions += 1;
        JointPmf::UNIFORM
    })
}

/// Group convolution: `out[o] = sum of a[m] b[n] over m ^ n = o`.
pub fn chk_combine(a: &JointPmf, b: &JointPmf) -> JointPmf {
    JointPmf(conv(&a.0, &b.0))
}

/// Recursive variable rule over any number of incoming messages.
pub fn var_combine_all(msgs: &[JointPmf], contradictions: &mut usize) -> JointPmf {
    msgs.iter().fold(JointPmf::UNIFORM, |acc, m| var_combine_counted(&acc, m, contradictions))
}

/// Recursive check rule over any number of incoming messages.
pub fn chk_combine_all(msgs: &[JointPmf]) -> JointPmf {
    msgs.iter().fold(JointPmf::point(0), |acc, m| chk_combine(&acc, m))
}
