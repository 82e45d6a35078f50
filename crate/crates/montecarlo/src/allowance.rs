//! Tail allowances and error budgets for the full-process theorems.
//!
//! Write `W = W^N + R_N`. On the event `E(m, d)` that every coefficient of
//! level `j >= m` satisfies `|X_{j,k}| <= sqrt(2 (1 + d) j ln 2)`, whose
//! complement has probability at most `tail_bound(m, d)`, level `j`
//! contributes at most `2^(-j/2) sqrt(2 (1 + d) j ln 2) / 2` at any time.

use std::f64::consts::LN_2;

use bounds::{tail_bound, truncated_global_bound};
use modulus_core::{g_times_r, g_unchecked, s_of_log};
use statrs::function::erf::erfc;

use crate::Result;

/// `sum_{j > n} 2^(-j/2) sqrt(j)`.
pub fn series_tail(n: u32) -> f64 {
    // Terms past n + 200 are below 2^-100 of the first one.
    (n + 1..=n + 200).map(|j| (-(j as f64) / 2.0).exp2() * (j as f64).sqrt()).sum()
}

/// Bound on `|R_N(s) - R_N(t)|` for all `s, t` on `E(N + 1, d)`.
pub fn increment_allowance(n: u32, d: f64) -> f64 {
    (1.0 + d).sqrt() * (2.0 * LN_2).sqrt() * series_tail(n)
}

/// Bound on `|R_N(t)|` for all `t` on `E(N + 1, d)`.
pub fn pointwise_allowance(n: u32, d: f64) -> f64 {
    0.5 * increment_allowance(n, d)
}

/// `δ_m = m 2^-m`: the band handled by level `m` in the small-gap argument.
pub fn small_gap_delta(m: u32) -> f64 {
    m as f64 * (-(m as f64)).exp2()
}

const SMALL_GAP_LEVELS: u32 = 1000;

/// Does exponent `e2` let level `m` absorb its tail, for every `m` in
/// `n+1 ..`?  For gaps `γ` in `[δ_{m+1}, δ_m)` we need
/// `sqrt(1+e2) (g(γ) + A_m) <= sqrt(1+ε) g(γ) r(γ)`; the left side minus the
/// right is largest at `γ = δ_{m+1}`.
fn small_gaps_absorbed(epsilon: f64, e2: f64, n: u32) -> bool {
    let (a, b) = ((1.0 + epsilon).sqrt(), (1.0 + e2).sqrt());
    (n + 1..n + 1 + SMALL_GAP_LEVELS).all(|m| {
        let x = small_gap_delta(m + 1);
        a * g_times_r(x) - b * g_unchecked(x) >= b * (2.0 * LN_2).sqrt() * series_tail(m)
    })
}

/// Split of the uniform theorem's full-process event at level `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSplit {
    /// Exponent used for the tail event and the small-gap bounds.
    pub epsilon_tail: f64,
    /// Increment allowance added to gaps `>= δ_{n+1}`.
    pub allowance: f64,
    /// Gap floor `δ_{n+1}` of the pessimistic statistic.
    pub gap_floor: f64,
    pub tail_budget: f64,
    pub small_gap_budget: f64,
}

impl UniformSplit {
    pub fn budget(&self) -> f64 {
        self.tail_budget + self.small_gap_budget
    }
}

/// Largest exponent `e2 <= ε` for which gaps below `δ_{n+1}` never exceed
/// `sqrt(1+ε)` off an event of small probability. `None` when no positive
/// exponent works.
pub fn uniform_split(epsilon: f64, n: u32) -> Result<Option<UniformSplit>> {
    if !small_gaps_absorbed(epsilon, epsilon * 1e-9, n) {
        return Ok(None);
    }
    let (mut lo, mut hi) = (epsilon * 1e-9, epsilon);
    if small_gaps_absorbed(epsilon, hi, n) {
        lo = hi;
    }
    for _ in 0..60 {
        if hi - lo <= 1e-12 * epsilon {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if small_gaps_absorbed(epsilon, mid, n) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let e2 = lo;
    let mut small = 0.0;
    for m in n + 1..n + 1 + 4 * SMALL_GAP_LEVELS {
        let term = truncated_global_bound(e2, small_gap_delta(m), m)?.raw;
        small += term;
        if m > n + 50 && term < 1e-18 * small.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(Some(UniformSplit {
        epsilon_tail: e2,
        allowance: increment_allowance(n, e2),
        gap_floor: small_gap_delta(n + 1),
        tail_budget: tail_bound(n + 1, e2)?.raw,
        small_gap_budget: small,
    }))
}

/// Bound on `P(sup_{0 < t <= t_cut} W_t / (h(t) s(t, ε)) > sqrt(1+ε))`.
///
/// `(0, t_cut]` is cut into blocks `[t_cut q^-(i+1), t_cut q^-i]` with
/// `q = 1 + ε/20`. On each block `h s` is smallest at the left end, and the
/// reflection principle gives `2 Q(sqrt(1+ε) h(t_{i+1}) s(t_{i+1}) / sqrt(t_i))`.
/// With `l = ln(1/t_{i+1})` the argument is `sqrt(2 (1+ε) ln(l) / q) s(l)`.
/// Runs of blocks are bounded by their count times the term built from the
/// smallest `ln l` and the smallest `s` in the run; beyond `l = 1e250` the
/// bound `s >= 1` and `2 Q(x) <= exp(-x^2/2)` give a closed-form remainder.
pub fn local_reflection_budget(epsilon: f64, t_cut: f64) -> f64 {
    let q = 1.0 + epsilon / 20.0;
    let lq = q.ln();
    let l0 = (1.0 / t_cut).ln();
    let c2 = 2.0 * (1.0 + epsilon) / q;
    let two_q = |x: f64| erfc(x / std::f64::consts::SQRT_2);
    let mut total = 0.0;
    let mut i = 0.0f64;
    loop {
        let step = (i * 1e-3).floor().max(1.0);
        let la = l0 + (i + 1.0) * lq;
        let lb = l0 + (i + step) * lq;
        let x = (c2 * la.ln()).sqrt() * s_of_log(lb, epsilon);
        total += step * two_q(x);
        i += step;
        if lb > 1e250 {
            break;
        }
    }
    let p = (1.0 + epsilon) / q;
    total + (l0 + i * lq).powf(1.0 - p) / ((p - 1.0) * lq)
}
