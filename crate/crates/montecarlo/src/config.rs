use bounds::Theorem;
use serde::{Deserialize, Serialize};

use crate::{McError, Result};

fn default_ci_level() -> f64 {
    0.99
}

/// One verification experiment. Fields not used by the chosen theorem stay
/// `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theorem: Theorem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// `δ`, or `δ0` for the uniform theorem.
    #[serde(default, alias = "delta0", skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Truncation level of the statistic (truncated theorems, tail lemma start level).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_n: Option<u32>,
    /// Level used to approximate the full process.
    #[serde(default, rename = "approx_level_N", skip_serializing_if = "Option::is_none")]
    pub approx_level_n: Option<u32>,
    /// Block index of the block corollary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Tail lemma exponent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Last level examined by the tail experiment.
    #[serde(default, rename = "horizon_J", skip_serializing_if = "Option::is_none")]
    pub horizon_j: Option<u32>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon_t: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    /// Test hook: every trial uses the zero path.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub zero_path: bool,
    /// Test hook: multiply the bound by this factor before the verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_scale: Option<f64>,
}

/// Level used for the full-process theorems when none is given.
pub const DEFAULT_APPROX_LEVEL: u32 = 18;

impl ExperimentConfig {
    pub fn new(theorem: Theorem, trials: u64, seed: u64) -> Self {
        Self {
            theorem,
            epsilon: None,
            delta: None,
            level_n: None,
            approx_level_n: None,
            m: None,
            d: None,
            horizon_j: None,
            horizon_t: None,
            trials,
            seed,
            ci_level: default_ci_level(),
            zero_path: false,
            bound_scale: None,
        }
    }

    pub fn epsilon(mut self, v: f64) -> Self {
        self.epsilon = Some(v);
        self
    }

    pub fn delta(mut self, v: f64) -> Self {
        self.delta = Some(v);
        self
    }

    pub fn level_n(mut self, v: u32) -> Self {
        self.level_n = Some(v);
        self
    }

    pub fn approx_level_n(mut self, v: u32) -> Self {
        self.approx_level_n = Some(v);
        self
    }

    pub fn m(mut self, v: u32) -> Self {
        self.m = Some(v);
        self
    }

    pub fn d(mut self, v: f64) -> Self {
        self.d = Some(v);
        self
    }

    pub fn horizon_j(mut self, v: u32) -> Self {
        self.horizon_j = Some(v);
        self
    }

    pub fn zero_path(mut self) -> Self {
        self.zero_path = true;
        self
    }

    pub fn bound_scale(mut self, v: f64) -> Self {
        self.bound_scale = Some(v);
        self
    }

    /// Checks that do not depend on the theorem.
    pub fn validate_common(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(McError::Config("trials must be at least 1".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(McError::Config(format!("ci_level {} not in (0, 1)", self.ci_level)));
        }
        if let (Some(n), Some(big)) = (self.level_n, self.approx_level_n) {
            if big < n {
                return Err(McError::Config(format!("approx_level_N {big} below level_n {n}")));
            }
        }
        if let Some(s) = self.bound_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(McError::Config(format!("bound_scale {s} must be positive")));
            }
        }
        Ok(())
    }

    pub(crate) fn need_epsilon(&self) -> Result<f64> {
        self.epsilon.ok_or_else(|| missing("epsilon", self.theorem))
    }

    pub(crate) fn need_delta(&self) -> Result<f64> {
        self.delta.ok_or_else(|| missing("delta", self.theorem))
    }

    pub(crate) fn need_level(&self) -> Result<u32> {
        self.level_n.ok_or_else(|| missing("level_n", self.theorem))
    }

    pub(crate) fn approx_level(&self, min: u32) -> Result<u32> {
        let n = self.approx_level_n.unwrap_or(DEFAULT_APPROX_LEVEL);
        if n < min {
            return Err(McError::Config(format!(
                "approx_level_N = {n} below the minimum {min} for {}",
                self.theorem
            )));
        }
        if n > 24 {
            return Err(McError::Config(format!("approx_level_N = {n} exceeds the supported 24")));
        }
        Ok(n)
    }
}

fn missing(name: &str, th: Theorem) -> McError {
    McError::Config(format!("missing `{name}` for {th}"))
}
