//! Closed-form tail bounds for normalised Brownian increments.
//!
//! Every evaluator returns a [`BoundEvaluation`] carrying the raw value, the
//! value clamped to `[0, 1]` and a `vacuous` flag (`raw >= 1`). Indicator
//! boundaries follow the printed statements literally: `K1` switches on the
//! open interval `(0, 1)`, `J` and `f` on `(0, 1]`, `K2` on `(0, 2a]`.

mod audit;

pub use audit::{series_audit, series_partial_sum, SeriesAudit};

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use modulus_core::{DELTA_MAX, LOCAL_T_MAX};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("{name} = {value} violates {requirement}")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("missing parameter `{0}` for {1}")]
    Missing(&'static str, Theorem),
    #[error("unknown theorem `{0}`")]
    UnknownTheorem(String),
}

pub type Result<T> = std::result::Result<T, BoundError>;

fn require(ok: bool, name: &'static str, value: f64, requirement: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(BoundError::Domain {
            name,
            value,
            requirement,
        })
    }
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    require(x > 0.0 && x.is_finite(), name, x, "> 0")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    TruncatedGlobal,
    FixedDelta,
    Uniform,
    ScaledFixed,
    ScaledUniform,
    Tail,
    TruncatedLocal,
    BlockLocal,
    LocalDeviation,
}

impl Theorem {
    pub const ALL: [Theorem; 9] = [
        Theorem::TruncatedGlobal,
        Theorem::FixedDelta,
        Theorem::Uniform,
        Theorem::ScaledFixed,
        Theorem::ScaledUniform,
        Theorem::Tail,
        Theorem::TruncatedLocal,
        Theorem::BlockLocal,
        Theorem::LocalDeviation,
    ];

    /// Kebab-case name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Theorem::TruncatedGlobal => "truncated-global",
            Theorem::FixedDelta => "fixed-delta",
            Theorem::Uniform => "uniform",
            Theorem::ScaledFixed => "scaled-fixed",
            Theorem::ScaledUniform => "scaled-uniform",
            Theorem::Tail => "tail",
            Theorem::TruncatedLocal => "truncated-local",
            Theorem::BlockLocal => "block-local",
            Theorem::LocalDeviation => "local-deviation",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('_', "-");
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| BoundError::UnknownTheorem(s.to_string()))
    }
}

/// Parameters of a bound; unused fields stay `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<u32>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none", default)]
    pub horizon_t: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEvaluation {
    pub theorem: Theorem,
    pub params: BoundParams,
    pub raw: f64,
    pub clamped: f64,
    pub vacuous: bool,
}

impl BoundEvaluation {
    fn new(theorem: Theorem, params: BoundParams, raw: f64) -> Self {
        Self {
            theorem,
            params,
            raw,
            clamped: raw.min(1.0),
            vacuous: raw >= 1.0,
        }
    }

    /// Same evaluation with the raw value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.theorem, self.params, self.raw * factor)
    }
}

/// `a = 1 / (8 ln 2 - 1)`.
pub fn a_const() -> f64 {
    1.0 / (8.0 * LN_2 - 1.0)
}

/// `K(ε, δ, n) = 1 + 9 2^ε + 4 (2^(n+1) δ)^(1+ε) + 2 (2^(n+1) δ)^(2+ε)`.
pub fn k_truncated(epsilon: f64, delta: f64, n: u32) -> f64 {
    let x = (n as f64 + 1.0).exp2() * delta;
    1.0 + 9.0 * epsilon.exp2() + 4.0 * x.powf(1.0 + epsilon) + 2.0 * x.powf(2.0 + epsilon)
}

/// `K1(ε) = 27.95 + 0.11/ε` on `(0, 1)`, `27.95` otherwise.
pub fn k1(epsilon: f64) -> f64 {
    27.95 + if epsilon > 0.0 && epsilon < 1.0 { 0.11 / epsilon } else { 0.0 }
}

/// `K2(ε) = 9.57/ε^3 [ε <= 2a] + (14.59/ε + 9.9) [ε > 2a] + 24.05`.
pub fn k2(epsilon: f64) -> f64 {
    let branch = if epsilon <= 2.0 * a_const() {
        9.57 / epsilon.powi(3)
    } else {
        14.59 / epsilon + 9.9
    };
    branch + 24.05
}

pub fn truncated_global_bound(epsilon: f64, delta: f64, n: u32) -> Result<BoundEvaluation> {
    positive("epsilon", epsilon)?;
    require(n >= 4, "n", n as f64, ">= 4")?;
    require(delta > 0.0 && delta < 1.0, "delta", delta, "in (0, 1)")?;
    let l = (1.0 / delta).ln();
    let raw = if delta < (-(n as f64 + 1.0)).exp2() {
        3.0 * delta.powf(epsilon) / (PI * l).sqrt()
    } else {
        (-epsilon * (n as f64 + 1.0)).exp2() * k_truncated(epsilon, delta, n) / (PI * l).sqrt()
    };
    let params = BoundParams {
        epsilon: Some(epsilon),
        delta: Some(delta),
        n: Some(n),
        ..Default::default()
    };
    Ok(BoundEvaluation::new(Theorem::TruncatedGlobal, params, raw))
}

fn corrected_delta_check(delta: f64) -> Result<()> {
    require(delta > 0.0 && delta <= DELTA_MAX, "delta", delta, "in (0, 2^-5]")
}

pub fn fixed_delta_bound(epsilon: f64, delta: f64) -> Result<BoundEvaluation> {
    positive("epsilon", epsilon)?;
    corrected_delta_check(delta)?;
    let raw = k1(epsilon) * delta.powf(epsilon) * (1.0 / delta).ln().powf(1.5);
    let params = BoundParams {
        epsilon: Some(epsilon),
        delta: Some(delta),
        ..Default::default()
    };
    Ok(BoundEvaluation::new(Theorem::FixedDelta, params, raw))
}

pub fn uniform_bound(epsilon: f64, delta0: f64) -> Result<BoundEvaluation> {
    positive("epsilon", epsilon)?;
    corrected_delta_check(delta0)?;
    let raw = k2(epsilon) * delta0.powf(epsilon) * (1.0 / delta0).ln().powf(1.5);
    let params = BoundParams {
        epsilon: Some(epsilon),
        delta: Some(delta0),
        ..Default::default()
    };
    Ok(BoundEvaluation::new(Theorem::Uniform, params, raw))
}

fn scaled_check(delta: f64, horizon_t: f64) -> Result<()> {
    require(horizon_t >= 1.0 && horizon_t.is_finite(), "T", horizon_t, ">= 1")?;
    require(
        delta > 0.0 && delta <= horizon_t * DELTA_MAX,
        "delta",
        delta,
        "in (0, T 2^-5]",
    )
}

/// Fixed-δ bound on `[0, T]`: `K1(ε) (δ/T)^ε (ln(T/δ))^(3/2)`.
pub fn scaled_fixed_bound(epsilon: f64, delta: f64, horizon_t: f64) -> Result<BoundEvaluation> {
    positive("epsilon", epsilon)?;
    scaled_check(delta, horizon_t)?;
    let u = delta / horizon_t;
    let raw = k1(epsilon) * u.powf(epsilon) * (1.0 / u).ln().powf(1.5);
    let params = BoundParams {
        epsilon: Some(epsilon),
        delta: Some(delta),
        horizon_t: Some(horizon_t),
        ..Default::default()
    };
    Ok(BoundEvaluation::new(Theorem::ScaledFixed, params, raw))
}

/// Uniform bound on `[0, T]`: `K2(ε) (δ0/T)^ε (ln(T/δ0))^(3/2)`.
pub fn scaled_uniform_bound(epsilon: f64, delta0: f64, horizon_t: f64) -> Result<BoundEvaluation> {
    positive("epsilon", epsilon)?;
    scaled_check(delta0, horizon_t)?;
    let u = delta0 / horizon_t;
    let raw = k2(epsilon) * u.powf(epsilon) * (1.0 / u).ln().powf(1.5);
    let params = BoundParams {
        epsilon: Some(epsilon),
        delta: Some(delta0),
        horizon_t: Some(horizon_t),
        ..Default::default()
    };
    Ok(BoundEvaluation::new(Theorem::ScaledUniform, params, raw))
}

/// Probability that `max_{j >= n, k} |X_{j,k}| / sqrt(ln 2^j)` exceeds
/// `sqrt(2 (1 + d))`: at most `2^(-d n) / ((1 - 2^-d) sqrt(π n ln 2))`.
pub fn tail_bound(n: u32, d: f64) -> Result<BoundEvaluation> {
    positive("d", d)?;
    require(n >= 1, "n", n as f64, ">= 1")?;
    let nf = n as f64;
    let raw = (-d * nf).exp2() / ((1.0 - (-d).exp2()) * (PI * nf * LN_2).sqrt());
    let params = BoundParams {
        n: Some(n),
        d: Some(d),
        ..Default::default()
    };
    Ok(BoundEvaluation::new(Theorem::Tail, params, raw))
}

pub fn truncated_local_bound(epsilon: f64, delta: f64, n: u32) -> Result<BoundEvaluation> {
    positive("epsilon", epsilon)?;
    require(delta > 0.0 && delta <= LOCAL_T_MAX, "delta", delta, "in (0, 2^-4]")?;
    let l = (1.0 / delta).ln();
    let core = l.powf(-1.0 - epsilon) / (PI * l.ln()).sqrt();
    let cell = (-(n as f64 + 1.0)).exp2();
    let raw = if delta < cell {
        core / 2.0
    } else {
        ((delta / cell).floor() + 1.0) * core
    };
    let params = BoundParams {
        epsilon: Some(epsilon),
        delta: Some(delta),
        n: Some(n),
        ..Default::default()
    };
    Ok(BoundEvaluation::new(Theorem::TruncatedLocal, params, raw))
}

/// `m(ε) = floor(ε/(2 ln 2) ln ln 2^(m+1) + f(ε)) + m + 1` with
/// `f(ε) = (1 - 1/ln 2)` on `(0, 1]` and `0` otherwise.
///
/// The floor can be `-1` for small `ε`, in which case `m(ε) = m`.
pub fn m_of_epsilon(epsilon: f64, m: u32) -> Result<u32> {
    positive("epsilon", epsilon)?;
    require(m >= 1, "m", m as f64, ">= 1")?;
    let f = if epsilon <= 1.0 { 1.0 - 1.0 / LN_2 } else { 0.0 };
    let lln = ((m as f64 + 1.0) * LN_2).ln();
    let fl = (epsilon / (2.0 * LN_2) * lln + f).floor();
    Ok((fl as i64 + m as i64 + 1) as u32)
}

pub fn block_bound(epsilon: f64, m: u32) -> Result<BoundEvaluation> {
    positive("epsilon", epsilon)?;
    require(m >= 4, "m", m as f64, ">= 4")?;
    let me = m_of_epsilon(epsilon, m)?;
    let mf = m as f64;
    let raw = (me as f64 - mf - 1.0).exp2() * ((mf + 2.0) * LN_2).powf(-(1.0 + epsilon))
        / (PI * (1.0 + epsilon) * ((mf + 1.0) * LN_2).ln()).sqrt();
    let params = BoundParams {
        epsilon: Some(epsilon),
        m: Some(m),
        n: Some(me),
        ..Default::default()
    };
    Ok(BoundEvaluation::new(Theorem::BlockLocal, params, raw))
}

/// `J(ε, δ)` before clamping: `c(ε) / ((ln(1/δ))^(ε/2) sqrt(ln ln(1/δ)))` with
/// `c = 1.302/ε` on `(0, 1]` and `1.18` above.
pub fn local_deviation_bound(epsilon: f64, delta: f64) -> Result<BoundEvaluation> {
    positive("epsilon", epsilon)?;
    require(delta > 0.0 && delta < LOCAL_T_MAX, "delta", delta, "in (0, 2^-4)")?;
    let c = if epsilon <= 1.0 { 1.302 / epsilon } else { 1.18 };
    let l = (1.0 / delta).ln();
    let raw = c / (l.powf(epsilon / 2.0) * l.ln().sqrt());
    let params = BoundParams {
        epsilon: Some(epsilon),
        delta: Some(delta),
        ..Default::default()
    };
    Ok(BoundEvaluation::new(Theorem::LocalDeviation, params, raw))
}

fn need<T>(v: Option<T>, name: &'static str, th: Theorem) -> Result<T> {
    v.ok_or(BoundError::Missing(name, th))
}

/// Dispatch on the theorem identifier.
pub fn evaluate(theorem: Theorem, p: &BoundParams) -> Result<BoundEvaluation> {
    let eps = || need(p.epsilon, "epsilon", theorem);
    let delta = || need(p.delta, "delta", theorem);
    match theorem {
        Theorem::TruncatedGlobal => truncated_global_bound(eps()?, delta()?, need(p.n, "n", theorem)?),
        Theorem::FixedDelta => fixed_delta_bound(eps()?, delta()?),
        Theorem::Uniform => uniform_bound(eps()?, delta()?),
        Theorem::ScaledFixed => scaled_fixed_bound(eps()?, delta()?, need(p.horizon_t, "T", theorem)?),
        Theorem::ScaledUniform => scaled_uniform_bound(eps()?, delta()?, need(p.horizon_t, "T", theorem)?),
        Theorem::Tail => tail_bound(need(p.n, "n", theorem)?, need(p.d, "d", theorem)?),
        Theorem::TruncatedLocal => truncated_local_bound(eps()?, delta()?, need(p.n, "n", theorem)?),
        Theorem::BlockLocal => block_bound(eps()?, need(p.m, "m", theorem)?),
        Theorem::LocalDeviation => local_deviation_bound(eps()?, delta()?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamping_and_flags() {
        let b = local_deviation_bound(0.1, 1.0 / 32.0).unwrap();
        assert!(b.vacuous);
        assert_eq!(b.clamped, 1.0);
        let b = local_deviation_bound(1.0, 1.0 / 1024.0).unwrap();
        assert!(!b.vacuous);
        assert_eq!(b.clamped, b.raw);
    }

    #[test]
    fn indicator_boundaries() {
        assert_eq!(k1(1.0), 27.95);
        assert!((k1(0.999_999) - 27.95 - 0.11 / 0.999_999).abs() < 1e-12);
        let two_a = 2.0 * a_const();
        assert!((k2(two_a) - (9.57 / two_a.powi(3) + 24.05)).abs() < 1e-9);
        assert!((k2(two_a * (1.0 + 1e-12)) - (14.59 / (two_a * (1.0 + 1e-12)) + 9.9 + 24.05)).abs() < 1e-9);
        // f(ε) is on at ε = 1; J uses the 1.302/ε numerator at ε = 1.
        assert_eq!(m_of_epsilon(1.0, 4).unwrap(), 5);
        let j1 = local_deviation_bound(1.0, 0.001).unwrap().raw;
        let l: f64 = 1000f64.ln();
        assert!((j1 - 1.302 / (l.sqrt() * l.ln().sqrt())).abs() < 1e-15);
    }

    #[test]
    fn theorem_names_round_trip() {
        for t in Theorem::ALL {
            assert_eq!(t.name().parse::<Theorem>().unwrap(), t);
        }
        assert!("nope".parse::<Theorem>().is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(truncated_global_bound(1.0, 0.01, 3).is_err());
        assert!(fixed_delta_bound(1.0, 0.04).is_err());
        assert!(uniform_bound(0.0, 0.01).is_err());
        assert!(tail_bound(0, 1.0).is_err());
        assert!(truncated_local_bound(1.0, 0.07, 4).is_err());
        assert!(block_bound(1.0, 3).is_err());
        assert!(local_deviation_bound(1.0, 1.0 / 16.0).is_err());
        assert!(scaled_fixed_bound(1.0, 0.1, 2.0).is_err());
        assert!(evaluate(Theorem::Tail, &BoundParams { n: Some(4), ..Default::default() }).is_err());
    }
}
