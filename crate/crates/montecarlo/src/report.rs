use std::collections::BTreeMap;

use bounds::BoundEvaluation;
use serde::{Deserialize, Serialize};

use crate::ci::clopper_pearson;
use crate::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconclusive,
    Violated,
    Vacuous,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violated => "violated",
            Verdict::Vacuous => "vacuous",
        }
    }
}

/// Two-sided bracketing of a full-process statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    /// How the pessimistic statistic is formed from the level-N path.
    pub allowance_formula: String,
    /// Allowance added to the truncated increments or values.
    pub allowance: f64,
    /// Exponent `d` of the tail event the allowance relies on.
    pub tail_exponent: f64,
    /// Probability budget of every event the bracket ignores.
    pub error_budget: f64,
    pub budget_terms: BTreeMap<String, f64>,
    pub high_rate: f64,
    pub high_ci_low: f64,
    pub high_ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Level of the sampled path.
    pub level_used: u32,
    /// Exceedances of the statistic computed on the sampled path.
    pub exceedances: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: BoundEvaluation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket_low_exceedances: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket_high_exceedances: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Bracket>,
    pub verdict: Verdict,
    /// Seconds; the only field that varies between identical runs.
    pub wall_time: f64,
}

impl ExperimentReport {
    /// Copy with `wall_time` zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time: 0.0,
            ..self.clone()
        }
    }

    /// Upper confidence limit of the bound-unfavourable side plus its budget:
    /// the number a bound has to beat.
    pub fn pessimistic_upper(&self) -> f64 {
        match &self.bracket {
            Some(b) => b.high_ci_high + b.error_budget,
            None => self.ci_high,
        }
    }
}

/// Counts gathered by a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub plain: u64,
    pub low: u64,
    pub high: u64,
}

/// Verdict for counts under the bound-favouring (`low`) and
/// bound-unfavouring (`high`) statistics. `budget` is the probability of
/// every event on which the brackets may fail.
///
/// * vacuous: the bound carries no information.
/// * violated: the lower limit of the favouring side exceeds bound + budget.
/// * consistent: the upper limit of the unfavouring side plus budget stays
///   under the bound, or the truth is pinned between brackets that both sit
///   under it (unfavouring lower limit and favouring upper limit).
/// * inconclusive otherwise.
pub fn verdict(counts: Counts, trials: u64, level: f64, bound: &BoundEvaluation, budget: f64) -> Verdict {
    if bound.vacuous {
        return Verdict::Vacuous;
    }
    let b = bound.clamped;
    let (low_lo, low_hi) = clopper_pearson(counts.low, trials, level);
    let (high_lo, high_hi) = clopper_pearson(counts.high, trials, level);
    if low_lo > b + budget {
        Verdict::Violated
    } else if high_hi + budget <= b || (high_lo + budget <= b && low_hi + budget <= b) {
        Verdict::Consistent
    } else {
        Verdict::Inconclusive
    }
}
