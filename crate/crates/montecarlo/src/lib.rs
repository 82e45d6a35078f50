//! Monte Carlo checks of the modulus-of-continuity bounds.
//!
//! Each run samples `trials` independent paths, counts how often the
//! theorem's event occurs and compares an exact binomial confidence interval
//! with the bound. Theorems about the untruncated process are bracketed
//! between a statistic that never exceeds the true one and a statistic that
//! dominates it off an event of known small probability.

pub mod allowance;
pub mod ci;
mod config;
mod report;

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::time::Instant;

use bounds::{BoundError, BoundEvaluation, Theorem};
use exact_supremum::{
    global_band_sup_grid, horizon_fixed_statistic, local_sup_grid, sup_gap_ratio, sup_gap_ratios, sup_local_ratio,
    unit_fixed_statistic, DenominatorKind, GapSpec, LocalDenom, SupError,
};
use levy_ciesielski::rng::{derive_seed, level_stream, NormalStream};
use levy_ciesielski::{NodeGrid, NodeSampler, TruncatedPath, WindowSampler};
use modulus_core::{g_times_r, g_unchecked, global_correction, ModulusError};
use rayon::prelude::*;
use thiserror::Error;

pub use ci::{clopper_pearson, exact_coverage};
pub use config::{ExperimentConfig, DEFAULT_APPROX_LEVEL};
pub use report::{verdict, Bracket, Counts, ExperimentReport, Verdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Sup(#[from] SupError),
    #[error(transparent)]
    Modulus(#[from] ModulusError),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, McError>;

/// Run the experiment named by `config.theorem` on the current rayon pool.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.theorem {
        Theorem::TruncatedGlobal => run_truncated_global(config),
        Theorem::FixedDelta => run_fixed_delta(config),
        Theorem::Uniform => run_uniform(config),
        Theorem::TruncatedLocal => run_truncated_local(config),
        Theorem::BlockLocal => run_block_local(config),
        Theorem::LocalDeviation => run_local_deviation(config),
        Theorem::Tail => run_tail(config),
        th @ (Theorem::ScaledFixed | Theorem::ScaledUniform) => Err(McError::Config(format!(
            "{th} reduces to the unit interval by scaling; use scaling_check"
        ))),
    }
}

/// [`run`] on a dedicated pool of `workers` threads (all cores when `None`).
/// The report does not depend on the worker count.
pub fn run_with_workers(config: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(McError::Config("workers must be at least 1".into()));
        }
        b = b.num_threads(w);
    }
    let pool = b.build().map_err(|e| McError::Pool(e.to_string()))?;
    pool.install(|| run(config))
}

const CHUNK: u64 = 64;

/// Count events over all trials: the statistic of the sampled path, the
/// bound-favouring and the bound-unfavouring statistic. Trial `i` sees
/// the seed `derive_seed(master, i)`; the per-chunk state `S` holds reusable
/// buffers.
fn count_trials<S>(
    config: &ExperimentConfig,
    init: impl Fn() -> S + Sync,
    trial: impl Fn(&mut S, Option<u64>) -> [bool; 3] + Sync,
) -> Counts {
    let (trials, master, zero) = (config.trials, config.seed, config.zero_path);
    (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut state = init();
            let mut counts = Counts::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let seed = (!zero).then(|| derive_seed(master, i));
                let [plain, lo, hi] = trial(&mut state, seed);
                counts.plain += plain as u64;
                counts.low += lo as u64;
                counts.high += hi as u64;
            }
            counts
        })
        .reduce(Counts::default, |a, b| Counts {
            plain: a.plain + b.plain,
            low: a.low + b.low,
            high: a.high + b.high,
        })
}

fn node_grid(s: &mut NodeSampler, seed: Option<u64>) -> NodeGrid<'_> {
    match seed {
        Some(x) => s.resample(x),
        None => s.zero(),
    }
}

fn window_grid(s: &mut WindowSampler, seed: Option<u64>) -> NodeGrid<'_> {
    match seed {
        Some(x) => s.resample(x),
        None => s.zero(),
    }
}

fn threshold(epsilon: f64) -> f64 {
    (1.0 + epsilon).sqrt()
}

/// Largest multiple of `h` not above `x`, robust to dyadic rounding.
fn grid_floor(x: f64, h: f64) -> f64 {
    let r = x / h;
    let k = if (r - r.round()).abs() <= 1e-9 * r.max(1.0) { r.round() } else { r.floor() };
    k * h
}

/// Window exponent `p` with `δ <= 2^-p`, as narrow as the level allows.
fn window_exponent(delta: f64, level: u32) -> u32 {
    let p = (1.0 / delta).log2();
    let p = if (p - p.round()).abs() < 1e-9 { p.round() } else { p.floor() };
    (p.max(0.0) as u32).min(level + 1)
}

struct Plan {
    level_used: u32,
    bound: BoundEvaluation,
    bracket: Option<BracketPlan>,
}

struct BracketPlan {
    formula: String,
    allowance: f64,
    tail_exponent: f64,
    budget_terms: BTreeMap<String, f64>,
}

impl BracketPlan {
    fn budget(&self) -> f64 {
        self.budget_terms.values().sum::<f64>().min(1.0)
    }
}

fn finish(config: &ExperimentConfig, plan: Plan, counts: Counts, start: Instant) -> ExperimentReport {
    let bound = match config.bound_scale {
        Some(f) => plan.bound.scaled(f),
        None => plan.bound,
    };
    let n = config.trials;
    let plain = counts.plain;
    let rate = plain as f64 / n as f64;
    let (ci_low, ci_high) = clopper_pearson(plain, n, config.ci_level);
    let budget = plan.bracket.as_ref().map_or(0.0, BracketPlan::budget);
    let v = verdict(counts, n, config.ci_level, &bound, budget);
    let bracket = plan.bracket.map(|b| {
        let (lo, hi) = clopper_pearson(counts.high, n, config.ci_level);
        Bracket {
            error_budget: b.budget(),
            allowance_formula: b.formula,
            allowance: b.allowance,
            tail_exponent: b.tail_exponent,
            budget_terms: b.budget_terms,
            high_rate: counts.high as f64 / n as f64,
            high_ci_low: lo,
            high_ci_high: hi,
        }
    });
    let bracketed = bracket.is_some();
    ExperimentReport {
        config: config.clone(),
        level_used: plan.level_used,
        exceedances: plain,
        rate,
        ci_low,
        ci_high,
        bound,
        bracket_low_exceedances: bracketed.then_some(counts.low),
        bracket_high_exceedances: bracketed.then_some(counts.high),
        bracket,
        verdict: v,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Event `sup_{0 < s-t <= δ} |W^n_s - W^n_t| / g(s-t) > sqrt(1+ε)`; exact statistic.
pub fn run_truncated_global(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    config.validate_common()?;
    let (eps, delta, n) = (config.need_epsilon()?, config.need_delta()?, config.need_level()?);
    let bound = bounds::truncated_global_bound(eps, delta, n)?;
    let kind = DenominatorKind::GapGlobal;
    global_band_sup_grid(NodeSampler::new(n).zero(), delta, kind)?;
    let thr = threshold(eps);
    let counts = count_trials(
        config,
        || NodeSampler::new(n),
        |s, seed| {
            let v = global_band_sup_grid(node_grid(s, seed), delta, kind).expect("validated").value;
            [v > thr; 3]
        },
    );
    let plan = Plan {
        level_used: n,
        bound,
        bracket: None,
    };
    Ok(finish(config, plan, counts, start))
}

/// Event `sup_{|s-t| <= δ} |W_s - W_t| / (g(δ) r(δ)) > sqrt(1+ε)` for the
/// full process, bracketed at level `N`.
pub fn run_fixed_delta(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    config.validate_common()?;
    let (eps, delta) = (config.need_epsilon()?, config.need_delta()?);
    let big_n = config.approx_level(14)?;
    let bound = bounds::fixed_delta_bound(eps, delta)?;
    let den = g_unchecked(delta) * global_correction(delta)?;
    let allowance = allowance::increment_allowance(big_n, eps);
    let h = (-(big_n as f64 + 1.0)).exp2();
    // Node pairs are pairs of the full process too.
    let node_delta = grid_floor(delta, h);
    let thr = threshold(eps);
    let counts = count_trials(
        config,
        || NodeSampler::new(big_n),
        |s, seed| {
            let grid = node_grid(s, seed);
            let band = sup_gap_ratio(grid, delta, |_| den, 0.0, 0.0).value;
            let nodes = if node_delta == delta {
                band
            } else {
                sup_gap_ratio(grid, node_delta, |_| den, 0.0, 0.0).value
            };
            [band > thr, nodes > thr, band + allowance / den > thr]
        },
    );
    let mut terms = BTreeMap::new();
    terms.insert(format!("tail_bound({}, {eps})", big_n + 1), bounds::tail_bound(big_n + 1, eps)?.raw);
    let plan = Plan {
        level_used: big_n,
        bound,
        bracket: Some(BracketPlan {
            formula: "high = low + sqrt(1+d) sqrt(2 ln 2) sum_{j>N} 2^(-j/2) sqrt(j) / (g(δ) r(δ)), d = ε".into(),
            allowance,
            tail_exponent: eps,
            budget_terms: terms,
        }),
    };
    Ok(finish(config, plan, counts, start))
}

/// Event `sup_{0 < s-t <= δ0} |W_s - W_t| / (g(s-t) r(s-t)) > sqrt(1+ε)`
/// for the full process, bracketed at level `N`.
pub fn run_uniform(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    config.validate_common()?;
    let (eps, delta0) = (config.need_epsilon()?, config.need_delta()?);
    let big_n = config.approx_level(14)?;
    let bound = bounds::uniform_bound(eps, delta0)?;
    let split = allowance::uniform_split(eps, big_n)?;
    let h = (-(big_n as f64 + 1.0)).exp2();
    let node_delta = grid_floor(delta0, h);
    let thr = threshold(eps);
    let den = |x: f64| g_times_r(x);
    let counts = count_trials(
        config,
        || NodeSampler::new(big_n),
        |s, seed| {
            let grid = node_grid(s, seed);
            let mut specs = vec![GapSpec {
                denom: &den,
                offset: 0.0,
                gap_floor: 0.0,
            }];
            if let Some(sp) = split {
                specs.push(GapSpec {
                    denom: &den,
                    offset: sp.allowance,
                    gap_floor: sp.gap_floor,
                });
            }
            let r = sup_gap_ratios(grid, delta0, &specs);
            let band = r[0].value;
            let nodes = if node_delta == delta0 {
                band
            } else {
                sup_gap_ratio(grid, node_delta, den, 0.0, 0.0).value
            };
            let high = match split {
                Some(_) => band.max(r[1].value),
                None => f64::INFINITY,
            };
            [band > thr, nodes > thr, high > thr]
        },
    );
    let mut terms = BTreeMap::new();
    let (allow, e2) = match split {
        Some(sp) => {
            terms.insert(format!("tail_bound({}, {})", big_n + 1, sp.epsilon_tail), sp.tail_budget);
            terms.insert("sum_{m>N} truncated_global_bound(d, m 2^-m, m)".into(), sp.small_gap_budget);
            (sp.allowance, sp.epsilon_tail)
        }
        None => {
            terms.insert("no admissible tail exponent".into(), 1.0);
            (f64::INFINITY, 0.0)
        }
    };
    let plan = Plan {
        level_used: big_n,
        bound,
        bracket: Some(BracketPlan {
            formula: "high = max(low, sup (|ΔW^N| + sqrt(1+d) sqrt(2 ln 2) sum_{j>N} 2^(-j/2) sqrt(j)) \
                      / (g r)(max(s-t, (N+1) 2^-(N+1)))); gaps below (N+1) 2^-(N+1) handled per level m \
                      by truncated_global_bound(d, m 2^-m, m)"
                .into(),
            allowance: allow,
            tail_exponent: e2,
            budget_terms: terms,
        }),
    };
    Ok(finish(config, plan, counts, start))
}

/// Event `sup_{0 < t <= δ} W^n_t / h(t) >= sqrt(1+ε)`; exact statistic.
pub fn run_truncated_local(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    config.validate_common()?;
    let (eps, delta, n) = (config.need_epsilon()?, config.need_delta()?, config.need_level()?);
    let bound = bounds::truncated_local_bound(eps, delta, n)?;
    let p = window_exponent(delta, n);
    let kind = DenominatorKind::LocalPlain;
    local_sup_grid(WindowSampler::new(n, p).zero(), delta, kind)?;
    let thr = threshold(eps);
    let counts = count_trials(
        config,
        || WindowSampler::new(n, p),
        |s, seed| {
            let v = local_sup_grid(window_grid(s, seed), delta, kind).expect("validated").value;
            [v >= thr; 3]
        },
    );
    let plan = Plan {
        level_used: n,
        bound,
        bracket: None,
    };
    Ok(finish(config, plan, counts, start))
}

/// Event `sup_{t in [2^-(m+1), 2^-m)} W^{m(ε)}_t / h(t) >= sqrt(1+ε)`; the
/// path level is routed through `m(ε)`.
pub fn run_block_local(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    config.validate_common()?;
    let eps = config.need_epsilon()?;
    let m = config
        .m
        .ok_or_else(|| McError::Config(format!("missing `m` for {}", config.theorem)))?;
    let level = bounds::m_of_epsilon(eps, m)?;
    if let Some(n) = config.level_n {
        if n != level {
            return Err(McError::Config(format!("level_n = {n} but m(ε) = {level}")));
        }
    }
    let bound = bounds::block_bound(eps, m)?;
    exact_supremum::block_sup_grid(WindowSampler::new(level, m).zero(), m)?;
    let thr = threshold(eps);
    let counts = count_trials(
        config,
        || WindowSampler::new(level, m),
        |s, seed| {
            let v = exact_supremum::block_sup_grid(window_grid(s, seed), m).expect("validated").value;
            [v >= thr; 3]
        },
    );
    let plan = Plan {
        level_used: level,
        bound,
        bracket: None,
    };
    Ok(finish(config, plan, counts, start))
}

/// Event `sup_{0 < t <= δ} W_t / (h(t) s(t, ε)) > sqrt(1+ε)` for the full
/// process, bracketed at level `N`.
pub fn run_local_deviation(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    config.validate_common()?;
    let (eps, delta) = (config.need_epsilon()?, config.need_delta()?);
    let big_n = config.approx_level(16)?;
    let bound = bounds::local_deviation_bound(eps, delta)?;
    let kind = DenominatorKind::LocalCorrected { epsilon: eps };
    let den = LocalDenom::new(kind)?;
    let d = 1.0 + 2.0 / eps;
    let allowance = allowance::pointwise_allowance(big_n, d);
    let t_cut = (-(big_n as f64 - 4.0)).exp2().min(delta);
    let p = window_exponent(delta, big_n);
    let h = (-(big_n as f64 + 1.0)).exp2();
    let node_delta = grid_floor(delta, h);
    local_sup_grid(WindowSampler::new(big_n, p).zero(), delta, kind)?;
    let thr = threshold(eps);
    let counts = count_trials(
        config,
        || WindowSampler::new(big_n, p),
        |s, seed| {
            let grid = window_grid(s, seed);
            let v = local_sup_grid(grid, delta, kind).expect("validated").value;
            let nodes = if node_delta == delta {
                v
            } else {
                sup_local_ratio(grid, 0.0, node_delta, den, 0.0).0.max(0.0)
            };
            let upper = sup_local_ratio(grid, t_cut, delta, den, allowance).0;
            [v > thr, nodes > thr, v.max(upper) > thr]
        },
    );
    let mut terms = BTreeMap::new();
    terms.insert(format!("tail_bound({}, {d})", big_n + 1), bounds::tail_bound(big_n + 1, d)?.raw);
    terms.insert(
        format!("reflection over (0, {t_cut:e}]"),
        allowance::local_reflection_budget(eps, t_cut),
    );
    let plan = Plan {
        level_used: big_n,
        bound,
        bracket: Some(BracketPlan {
            formula: "high = max(low, sup_{t in [2^-(N-4) ∧ δ, δ]} (W^N_t + sqrt((1+d) ln 2 / 2) \
                      sum_{j>N} 2^(-j/2) sqrt(j)) / (h(t) s(t, ε))), d = 1 + 2/ε; smaller t by reflection \
                      over geometric blocks"
                .into(),
            allowance,
            tail_exponent: d,
            budget_terms: terms,
        }),
    };
    Ok(finish(config, plan, counts, start))
}

/// Event `max_{n <= j <= J, k} |X_{j,k}| / sqrt(j ln 2) > sqrt(2 (1 + d))`.
/// Stopping at `J` can only miss exceedances.
pub fn run_tail(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    config.validate_common()?;
    let n = config.need_level()?;
    let d = config
        .d
        .ok_or_else(|| McError::Config(format!("missing `d` for {}", config.theorem)))?;
    let big_j = config
        .horizon_j
        .ok_or_else(|| McError::Config(format!("missing `horizon_J` for {}", config.theorem)))?;
    if big_j < n || big_j > 26 {
        return Err(McError::Config(format!("horizon_J = {big_j} must lie in [n, 26]")));
    }
    let bound = bounds::tail_bound(n, d)?;
    let thr = (2.0 * (1.0 + d)).sqrt();
    let counts = count_trials(
        config,
        || (),
        |_, seed| {
            let Some(seed) = seed else { return [false; 3] };
            let hit = (n..=big_j).any(|j| {
                let cut = thr * (j as f64 * LN_2).sqrt();
                let mut st = NormalStream::new(seed, level_stream(j));
                (0..1u64 << j).any(|_| st.next_normal().abs() > cut)
            });
            [hit; 3]
        },
    );
    let plan = Plan {
        level_used: big_j,
        bound,
        bracket: None,
    };
    Ok(finish(config, plan, counts, start))
}

/// The `[0, T]` fixed-δ statistic of `sqrt(T) W(·/T)` and the unit-interval
/// statistic at `δ/T`, for the level-`n` path of `seed`.
pub fn scaling_statistics(seed: u64, n: u32, delta: f64, horizon_t: f64) -> Result<(f64, f64)> {
    if !(horizon_t >= 1.0 && horizon_t.is_finite()) {
        return Err(McError::Config(format!("T = {horizon_t} must be >= 1")));
    }
    let path = TruncatedPath::sample(n, seed);
    let eps = 1.0;
    Ok((
        horizon_fixed_statistic(&path, delta, horizon_t, eps)?,
        unit_fixed_statistic(&path, delta / horizon_t, eps)?,
    ))
}

/// Per-path scaling identity to `1e-12`.
pub fn scaling_check(seed: u64, n: u32, delta: f64, horizon_t: f64) -> Result<bool> {
    let (a, b) = scaling_statistics(seed, n, delta, horizon_t)?;
    Ok((a - b).abs() <= 1e-12)
}
