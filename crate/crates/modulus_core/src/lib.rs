//! Moduli of continuity for Brownian paths.
//!
//! * `g(x) = sqrt(2 x ln(1/x))`, the global (Lévy) modulus;
//! * `h(t) = sqrt(2 t ln ln(1/t))`, the local (iterated logarithm) modulus;
//! * `r(δ)`, `r(δ, T)` and `s(t, ε)`, the multiplicative corrections under
//!   which the non-asymptotic deviation bounds hold.
//!
//! All functions are pure and reject arguments outside their domain instead
//! of returning NaN.

use std::f64::consts::E;

use thiserror::Error;

/// Constant in the global correction `r(δ) = 1 + 2.65 / sqrt(ln(1/δ))`.
pub const GLOBAL_CORRECTION_CONST: f64 = 2.65;

/// Looser constant quoted for `r` in informal statements; kept for reference only.
pub const GLOBAL_CORRECTION_CONST_LOOSE: f64 = 3.5;

/// Constant in the local correction `s(t, ε)`.
pub const LOCAL_CORRECTION_CONST: f64 = 3.61;

/// Largest gap accepted by the fixed-δ and uniform statements, `2^-5`.
pub const DELTA_MAX: f64 = 1.0 / 32.0;

/// Upper limit (exclusive) for the local correction, `2^-4`.
pub const LOCAL_T_MAX: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModulusError {
    #[error("{name} = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, ModulusError>;

fn domain(name: &'static str, value: f64, domain: &'static str) -> ModulusError {
    ModulusError::Domain {
        name,
        value,
        domain,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardKind {
    Global,
    Local,
}

/// Open interval on which a modulus has a strictly positive log factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusDomainGuard {
    pub kind: GuardKind,
    pub lower: f64,
    pub upper: f64,
}

impl ModulusDomainGuard {
    pub const GLOBAL: Self = Self {
        kind: GuardKind::Global,
        lower: 0.0,
        upper: 1.0,
    };

    pub fn local() -> Self {
        Self {
            kind: GuardKind::Local,
            lower: 0.0,
            upper: (-1.0f64).exp(),
        }
    }

    pub fn for_kind(kind: GuardKind) -> Self {
        match kind {
            GuardKind::Global => Self::GLOBAL,
            GuardKind::Local => Self::local(),
        }
    }

    pub fn accepts(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    fn check(&self, name: &'static str, x: f64) -> Result<()> {
        if self.accepts(x) {
            Ok(())
        } else {
            let d = match self.kind {
                GuardKind::Global => "(0, 1)",
                GuardKind::Local => "(0, 1/e)",
            };
            Err(domain(name, x, d))
        }
    }
}

/// Parameters shared by the corrected statements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionParams {
    pub epsilon: f64,
    pub delta: f64,
    pub horizon_t: f64,
}

impl CorrectionParams {
    pub fn new(epsilon: f64, delta: f64, horizon_t: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            delta,
            horizon_t,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(domain("epsilon", self.epsilon, "(0, inf)"));
        }
        if !(self.horizon_t >= 1.0 && self.horizon_t.is_finite()) {
            return Err(domain("T", self.horizon_t, "[1, inf)"));
        }
        if !(self.delta > 0.0 && self.delta <= self.horizon_t * DELTA_MAX) {
            return Err(domain("delta", self.delta, "(0, T 2^-5]"));
        }
        Ok(())
    }
}

/// `g(x) = sqrt(2 x ln(1/x))` for `0 < x < 1`.
pub fn global_modulus(x: f64) -> Result<f64> {
    ModulusDomainGuard::GLOBAL.check("x", x)?;
    Ok(g_unchecked(x))
}

/// `h(t) = sqrt(2 t ln ln(1/t))` for `0 < t < 1/e`.
pub fn local_modulus(t: f64) -> Result<f64> {
    ModulusDomainGuard::local().check("t", t)?;
    Ok(h_unchecked(t))
}

/// `r(δ) = 1 + 2.65 / sqrt(ln(1/δ))` for `0 < δ < 1`.
pub fn global_correction(delta: f64) -> Result<f64> {
    ModulusDomainGuard::GLOBAL.check("delta", delta)?;
    Ok(r_unchecked(delta))
}

/// `r(δ, T) = r(δ/T) sqrt(ln(T/δ) / ln(1/δ))`.
pub fn scaled_correction(delta: f64, horizon_t: f64) -> Result<f64> {
    if !(horizon_t >= 1.0 && horizon_t.is_finite()) {
        return Err(domain("T", horizon_t, "[1, inf)"));
    }
    if !(delta > 0.0 && delta <= horizon_t * DELTA_MAX) {
        return Err(domain("delta", delta, "(0, T 2^-5]"));
    }
    if delta >= 1.0 {
        return Err(domain("delta", delta, "(0, 1)"));
    }
    let ratio = ((horizon_t / delta).ln() / (1.0 / delta).ln()).sqrt();
    Ok(r_unchecked(delta / horizon_t) * ratio)
}

/// `s(t, ε)`, the local correction, for `0 < t < 2^-4` and `ε > 0`.
///
/// For `ε <= 1` the denominator is `sqrt(ε) max(sqrt(ln ln(1/t)), (ln(1/t))^(ε/4))`;
/// for `ε > 1` it is `(ln(1/t))^(ε/4)`.
pub fn local_correction(t: f64, epsilon: f64) -> Result<f64> {
    if !(t > 0.0 && t < LOCAL_T_MAX) {
        return Err(domain("t", t, "(0, 2^-4)"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(domain("epsilon", epsilon, "(0, inf)"));
    }
    Ok(s_unchecked(t, epsilon))
}

/// `g` without the domain check. Callers must guarantee `0 < x < 1`.
#[inline]
pub fn g_unchecked(x: f64) -> f64 {
    (2.0 * x * (1.0 / x).ln()).sqrt()
}

/// `h` without the domain check. Callers must guarantee `0 < t < 1/e`.
#[inline]
pub fn h_unchecked(t: f64) -> f64 {
    (2.0 * t * (1.0 / t).ln().ln()).sqrt()
}

#[inline]
pub fn r_unchecked(delta: f64) -> f64 {
    1.0 + GLOBAL_CORRECTION_CONST / (1.0 / delta).ln().sqrt()
}

#[inline]
pub fn s_unchecked(t: f64, epsilon: f64) -> f64 {
    s_of_log((1.0 / t).ln(), epsilon)
}

/// `s` as a function of `l = ln(1/t)`; usable where `t` itself underflows.
#[inline]
pub fn s_of_log(l: f64, epsilon: f64) -> f64 {
    let denom = if epsilon <= 1.0 {
        epsilon.sqrt() * l.ln().sqrt().max(l.powf(epsilon / 4.0))
    } else {
        l.powf(epsilon / 4.0)
    };
    1.0 + LOCAL_CORRECTION_CONST / denom
}

/// `g(x) r(x) = sqrt(2 x ln(1/x)) + 2.65 sqrt(2x)`, the denominator of the
/// uniform statistic.
#[inline]
pub fn g_times_r(x: f64) -> f64 {
    g_unchecked(x) * r_unchecked(x)
}

/// Argument at which `g` attains its maximum on `(0, 1)`.
pub fn global_peak() -> f64 {
    1.0 / E
}
