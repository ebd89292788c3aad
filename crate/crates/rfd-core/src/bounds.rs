//! Redundancy bound evaluators.
//!
//! All bounds are evaluated in bits (base-2 logarithms); the natural log
//! only appears through `log2(e)` factors. Inputs that the formulas need
//! exactly — the segment scale `L`, the carried mass `A`, `(1 - c) * L` —
//! are derived from the integer parameters and only converted to `f64` at
//! the outermost evaluation.

use crate::params::RfdParams;
use std::f64::consts::LOG2_E;
use thiserror::Error;

/// Everything a bound evaluation needs besides the parameters.
#[derive(Debug, Clone, Copy)]
pub struct BoundInputs<'a> {
    pub params: &'a RfdParams,
    /// Sequence length.
    pub n: u64,
    /// Number of segments of the competitor partition.
    pub s_size: u64,
    /// Number of segments of the rescale partition (measured or worst
    /// case). Must be at least 1.
    pub r_size: u64,
    /// Initial frequency total of the realization.
    pub t0: u64,
    /// Probability cap `1 - eps` of the competitor, when it has one.
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("discount * segment scale is not an integer; the bounded-competitor bound needs c = gamma/L")]
    NonIntegralGamma,
    #[error("the bounded-competitor bound needs an eps in (0, 1), got {eps:?}")]
    EpsMissingOrOutOfRange { eps: Option<f64> },
}

/// `(1 - c) * L` as an exact quotient of integers, converted to `f64`.
fn one_minus_c_scale(params: &RfdParams) -> f64 {
    let (num, den) = params.discount();
    let span = (params.threshold() - params.alphabet_size()) as u128;
    let p = (den as u128 - num as u128) * span;
    let q = den as u128 * params.increment() as u128;
    p as f64 / q as f64
}

/// Per-segment redundancy rate
/// `r(z) = (N + A) log2(z) + log2(A + 1) + (A + 1) log2(e) + N log2(d)`,
/// an upper bound on the redundancy of a single rescale segment of length
/// `z` against any fixed distribution. Increasing and concave in `z`.
pub fn segment_redundancy_bound(params: &RfdParams, z: f64) -> f64 {
    debug_assert!(z > 0.0);
    let n = params.alphabet_size() as f64;
    let d = params.increment() as f64;
    let a = params.derived().restart_scale_f64();
    (n + a) * z.log2() + (a + 1.0).log2() + (a + 1.0) * LOG2_E + n * d.log2()
}

/// Single-segment redundancy bound against any fixed distribution:
/// `((N-1)d + t0 - 1)/d * log2(n) + log2(t0/d) + (t0/d) log2(e) + N log2(d)`.
///
/// Applies to realizations whose rescale partition has exactly one
/// segment; the caller checks applicability. Requires `n >= 1`.
pub fn single_segment_bound(params: &RfdParams, n: u64, t0: u64) -> f64 {
    debug_assert!(n >= 1 && t0 >= 1);
    let alpha = params.alphabet_size() as f64;
    let d = params.increment() as f64;
    let t0 = t0 as f64;
    ((alpha - 1.0) * d + t0 - 1.0) / d * (n as f64).log2()
        + (t0 / d).log2()
        + (t0 / d) * LOG2_E
        + alpha * d.log2()
}

/// Redundancy bound against an arbitrary piecewise stationary competitor:
/// `|S| [ (1-c)L log2(e(L+1)) + log2((1-c)L) + r(L+1) ] + (|R|-1) r(L+1)`.
pub fn pws_redundancy_bound(inputs: &BoundInputs) -> f64 {
    debug_assert!(inputs.r_size >= 1);
    let params = inputs.params;
    let scale = params.derived().segment_scale_f64();
    let oml = one_minus_c_scale(params);
    let rate = segment_redundancy_bound(params, scale + 1.0);
    let per_competitor_segment = oml * (LOG2_E + (scale + 1.0).log2()) + oml.log2() + rate;
    inputs.s_size as f64 * per_competitor_segment + (inputs.r_size - 1) as f64 * rate
}

/// Result of the bounded-competitor bound: the multiplicative slack
/// `delta` and the additive right-hand side in bits. The guarantee reads
/// `ell(rfd) <= (1 + delta) * ell(pws) + rhs_bits`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedPwsBound {
    pub delta: f64,
    pub rhs_bits: f64,
}

/// Redundancy bound against competitors whose probabilities are capped at
/// `1 - eps`. Requires `c * L` integral (`c = gamma / L`); then
/// `delta = r(L+1) / (eps (L - gamma) log2 e)` and
/// `rhs = |S| [ (L-gamma) log2(e(L+1)) + log2(L-gamma) + r(L+1) ] + r(L+1)`.
pub fn bounded_pws_redundancy_bound(inputs: &BoundInputs) -> Result<BoundedPwsBound, BoundError> {
    let params = inputs.params;
    let gamma = params.gamma().ok_or(BoundError::NonIntegralGamma)?;
    let eps = match inputs.eps {
        Some(e) if e > 0.0 && e < 1.0 => e,
        other => return Err(BoundError::EpsMissingOrOutOfRange { eps: other }),
    };
    let scale = params.derived().segment_scale_f64();
    // With c = gamma/L, (1 - c) L = L - gamma exactly.
    let l_minus_gamma = scale - gamma as f64;
    let rate = segment_redundancy_bound(params, scale + 1.0);
    let delta = rate / (eps * l_minus_gamma * LOG2_E);
    let rhs_bits = inputs.s_size as f64
        * (l_minus_gamma * (LOG2_E + (scale + 1.0).log2()) + l_minus_gamma.log2() + rate)
        + rate;
    Ok(BoundedPwsBound { delta, rhs_bits })
}

/// Worst-case rescale partition size `floor(n / floor((1-c)L)) + 2`.
pub fn worst_case_rescale_count(params: &RfdParams, n: u64) -> u64 {
    let min_gap = params.derived().min_gap;
    n / min_gap + 2
}
