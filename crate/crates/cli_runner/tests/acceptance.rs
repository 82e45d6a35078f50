//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! tolerance each check uses. Runs as a plain binary so the report is always
//! visible in `cargo test` output.

use std::process::{Command, ExitCode};
use std::time::Instant;

use bounds::Theorem;
use exact_supremum::{global_band_sup, DenominatorKind, GridOracle};
use levy_ciesielski::{schauder, TruncatedPath};
use montecarlo::{run, ExperimentConfig, ExperimentReport, Verdict};
use statrs::distribution::{ContinuousCDF, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn report(cfg: ExperimentConfig) -> ExperimentReport {
    run(&cfg).unwrap_or_else(|e| panic!("{}: {e}", cfg.theorem))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let kinds = [DenominatorKind::GapGlobal, DenominatorKind::FixedGlobal, DenominatorKind::GapGlobalCorrected];
    let res = (-16.0f64).exp2();
    let (mut checked, mut worst_gap_over_slack, mut failures) = (0, f64::NEG_INFINITY, 0);
    for seed in 0..50u64 {
        for n in 3..=6u32 {
            let path = TruncatedPath::sample(n, seed);
            let oracle = GridOracle::new(&path, res, 1.0 / 32.0).unwrap();
            for delta in [1.0 / 64.0, 1.0 / 32.0] {
                for kind in kinds {
                    let exact = global_band_sup(&path, delta, kind).unwrap().value;
                    let o = oracle.global(delta, kind).unwrap();
                    let gap = exact - o.value;
                    checked += 1;
                    worst_gap_over_slack = worst_gap_over_slack.max(gap - o.slack);
                    if gap < -1e-12 || gap > o.slack + 1e-12 {
                        failures += 1;
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 120.0,
        format!(
            "{checked} cases, failures={failures}, max(gap - slack)={worst_gap_over_slack:.3e}, tol 1e-12, {secs:.1}s < 120s"
        ),
    )
}

fn structural_invariants() -> Outcome {
    let mut worst = 0.0f64;
    let mut overlap = 0;
    for seed in 0..100u64 {
        let n = 2 + (seed % 6) as u32;
        let p = TruncatedPath::sample(n, seed);
        let w = p.node_values();
        let h = p.cell_width();
        for k in 0..p.cells() {
            let mid = p.evaluate((k as f64 + 0.5) * h).unwrap();
            worst = worst.max((mid - 0.5 * (w[k] + w[k + 1])).abs());
        }
        let finer = TruncatedPath::sample(n + 3, seed);
        for (k, &v) in w.iter().enumerate() {
            worst = worst.max((finer.evaluate(k as f64 * h).unwrap() - v).abs());
        }
        for i in 0..32 {
            let t = ((seed * 32 + i) as f64 * 0.618_033_988_749_895).fract();
            let j = (seed % 12) as u32;
            let nonzero = (0..1u64 << j).filter(|&k| schauder(j, k, t).unwrap() != 0.0).count();
            overlap += (nonzero > 1) as u32;
        }
    }
    outcome(
        worst <= 1e-12 && overlap == 0,
        format!("100 seeds: max midpoint/extension error {worst:.2e} <= 1e-12, overlapping tents {overlap}"),
    )
}

fn scaling_identity() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        for t in [1.0, 2.0, 4.0] {
            let (a, b) = montecarlo::scaling_statistics(seed, 6, t / 64.0, t).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst <= 1e-12, format!("20 seeds x T in {{1,2,4}}: max |[0,T] - unit| = {worst:.2e} <= 1e-12"))
}

fn upper_limit_check(r: &ExperimentReport, limit: f64) -> (bool, String) {
    let ok = r.ci_high <= limit;
    (
        ok,
        format!(
            "{}/{} exceedances, 99% CP upper {:.6} {} {limit}",
            r.exceedances,
            r.config.trials,
            r.ci_high,
            if ok { "<=" } else { ">" }
        ),
    )
}

fn truncated_global() -> Outcome {
    let start = Instant::now();
    let r = report(ExperimentConfig::new(Theorem::TruncatedGlobal, 100_000, 1).epsilon(1.0).delta(1.0 / 64.0).level_n(4));
    let (ok, d) = upper_limit_check(&r, 0.012968);
    let secs = start.elapsed().as_secs_f64();
    outcome(ok && secs < 300.0, format!("{d}, {secs:.1}s < 300s"))
}

fn truncated_local() -> Outcome {
    let a = report(ExperimentConfig::new(Theorem::TruncatedLocal, 100_000, 3).epsilon(1.0).delta(1.0 / 1024.0).level_n(4));
    let b = report(ExperimentConfig::new(Theorem::TruncatedLocal, 10_000, 4).epsilon(1.0).delta(1.0 / 16.0).level_n(4));
    let (oa, da) = upper_limit_check(&a, 0.004220);
    // truncated_local_bound(1, 2^-4, 4) = 0.2180328.
    let (ob, db) = upper_limit_check(&b, 0.218033);
    outcome(oa && ob, format!("δ=2^-10: {da}; δ=2^-4: {db}"))
}

fn tail() -> Outcome {
    let r = report(ExperimentConfig::new(Theorem::Tail, 100_000, 5).level_n(4).d(1.0).horizon_j(14));
    let (ok, d) = upper_limit_check(&r, 0.042353);
    outcome(ok, d)
}

fn bracket_detail(r: &ExperimentReport) -> String {
    let b = r.bracket.as_ref().unwrap();
    format!(
        "low/plain/high = {}/{}/{}, high CP upper {:.6} + budget {:.2e} = {:.6} vs bound {:.6}, verdict {}",
        r.bracket_low_exceedances.unwrap(),
        r.exceedances,
        r.bracket_high_exceedances.unwrap(),
        b.high_ci_high,
        b.error_budget,
        r.pessimistic_upper(),
        r.bound.clamped,
        r.verdict.name()
    )
}

fn fixed_delta() -> Outcome {
    let r = report(ExperimentConfig::new(Theorem::FixedDelta, 10_000, 2).epsilon(2.0).delta(1.0 / 32.0).approx_level_n(18));
    // Formula value 27.95 2^-10 (ln 32)^1.5 = 0.1761064.
    let ok = r.pessimistic_upper() <= 0.1761064 && r.verdict == Verdict::Consistent;
    outcome(ok, format!("{} <= 0.1761064", bracket_detail(&r)))
}

fn uniform() -> Outcome {
    let r = report(ExperimentConfig::new(Theorem::Uniform, 10_000, 6).epsilon(2.0).delta(1.0 / 32.0).approx_level_n(18));
    let v = report(ExperimentConfig::new(Theorem::Uniform, 50, 6).epsilon(0.3).delta(1.0 / 32.0).approx_level_n(18));
    let ok = r.verdict == Verdict::Consistent && v.verdict == Verdict::Vacuous;
    outcome(
        ok,
        format!(
            "{}; ε=0.3: raw {:.3} -> verdict {}",
            bracket_detail(&r),
            v.bound.raw,
            v.verdict.name()
        ),
    )
}

fn local_deviation() -> Outcome {
    let r = report(
        ExperimentConfig::new(Theorem::LocalDeviation, 10_000, 7).epsilon(1.0).delta(1.0 / 1024.0).approx_level_n(18),
    );
    let v = report(ExperimentConfig::new(Theorem::LocalDeviation, 50, 7).epsilon(0.1).delta(1.0 / 32.0).approx_level_n(18));
    let ok = r.verdict == Verdict::Consistent
        && (r.bound.clamped - 0.355418).abs() < 5e-6
        && v.verdict == Verdict::Vacuous;
    outcome(
        ok,
        format!(
            "{}; ε=0.1: raw {:.3} -> verdict {}",
            bracket_detail(&r),
            v.bound.raw,
            v.verdict.name()
        ),
    )
}

/// Returns the outcome of the criterion and whether its documented
/// analytic explanation holds.
fn block_local() -> (Outcome, bool) {
    let r = report(ExperimentConfig::new(Theorem::BlockLocal, 100_000, 8).epsilon(1.0).m(4));
    let (ok, d) = upper_limit_check(&r, 0.020689);
    // At the block end t = 2^-4 (a level-5 node, where the truncated path
    // equals W) the event already holds with probability Q(2 sqrt(ln ln 16)).
    let t: f64 = 1.0 / 16.0;
    let z = 2.0f64.sqrt() * modulus_core::h_unchecked(t) / t.sqrt();
    let floor = Normal::standard().sf(z);
    let analytic = floor > r.bound.raw && r.ci_high >= floor && r.level_used == 5;
    let detail = format!(
        "{d}, level_used {} (m(ε)=5); unattainable: P(event) >= Q({z:.4}) = {floor:.5} > {:.6}",
        r.level_used, r.bound.raw
    );
    (outcome(ok && r.level_used == 5, detail), analytic)
}

fn regression() -> Outcome {
    use bounds::*;
    use modulus_core::*;
    let e = std::f64::consts::E;
    // Reference values: 40-digit mpmath evaluations of the printed formulas.
    let cases: Vec<(&str, f64, f64)> = vec![
        ("g(2^-5)", global_modulus(1.0 / 32.0).unwrap(), 0.465_412_176_382_379_27),
        ("g(e^-2)", global_modulus(e.powi(-2)).unwrap(), 0.735_758_882_342_884_6),
        ("h(2^-5)", local_modulus(1.0 / 32.0).unwrap(), 0.278_716_364_770_311_35),
        ("h(2^-10)", local_modulus(1.0 / 1024.0).unwrap(), 0.061_493_015_552_523_787),
        ("r(2^-5)", global_correction(1.0 / 32.0).unwrap(), 2.423_469_418_332_74),
        ("r(2^-10)", global_correction(1.0 / 1024.0).unwrap(), 2.006_544_878_514_751),
        ("r(2^-5, 2)", scaled_correction(1.0 / 32.0, 2.0).unwrap(), 2.518_914_533_343_072),
        ("r(2^-5, 4)", scaled_correction(1.0 / 32.0, 4.0).unwrap(), 2.606_685_374_952_663),
        ("s(2^-10, 2)", local_correction(1.0 / 1024.0, 2.0).unwrap(), 2.371_180_004_316_321),
        ("s(2^-10, 1)", local_correction(1.0 / 1024.0, 1.0).unwrap(), 3.224_850_515_333_99),
        ("s(2^-10, 0.5)", local_correction(1.0 / 1024.0, 0.5).unwrap(), 4.669_115_882_067_682),
        ("truncated_global(1, 2^-6, 4)", truncated_global_bound(1.0, 1.0 / 64.0, 4).unwrap().raw, 0.012_968_148_907_332_381),
        ("truncated_global(1, 2^-5, 4)", truncated_global_bound(1.0, 1.0 / 32.0, 4).unwrap().raw, 0.236_764_922_854_397_24),
        ("K(1, 2^-5, 4)", k_truncated(1.0, 1.0 / 32.0, 4), 25.0),
        ("K1(0.5)", k1(0.5), 28.17),
        ("fixed_delta(2, 2^-5)", fixed_delta_bound(2.0, 1.0 / 32.0).unwrap().raw, 0.176_106_365_295_373_25),
        ("a", a_const(), 0.220_013_412_504_845_17),
        ("K2(1)", k2(1.0), 48.54),
        ("K2(0.4)", k2(0.4), 173.581_25),
        ("scaled_fixed(2, 2^-4, 2)", scaled_fixed_bound(2.0, 1.0 / 16.0, 2.0).unwrap().raw, 0.176_106_365_295_373_25),
        ("scaled_uniform(1, 2^-4, 2)", scaled_uniform_bound(1.0, 1.0 / 16.0, 2.0).unwrap().raw, 9.786_851_344_758_403),
        ("tail(4, 1)", tail_bound(4, 1.0).unwrap().raw, 0.042_353_796_975_194_062),
        ("tail(8, 1)", tail_bound(8, 1.0).unwrap().raw, 0.001_871_791_065_634_875_4),
        ("tail(4, 2)", tail_bound(4, 2.0).unwrap().raw, 0.001_764_741_540_633_085_9),
        ("truncated_local(1, 2^-10, 4)", truncated_local_bound(1.0, 1.0 / 1024.0, 4).unwrap().raw, 0.004_219_717_476_135_306_3),
        ("truncated_local(2, 2^-10, 4)", truncated_local_bound(2.0, 1.0 / 1024.0, 4).unwrap().raw, 0.000_608_776_547_677_289_91),
        ("truncated_local(1, 2^-4, 4)", truncated_local_bound(1.0, 1.0 / 16.0, 4).unwrap().raw, 0.218_032_814_888_400_03),
        ("m(2, 4)", m_of_epsilon(2.0, 4).unwrap() as f64, 6.0),
        ("m(1, 4)", m_of_epsilon(1.0, 4).unwrap() as f64, 5.0),
        ("m(0.5, 8)", m_of_epsilon(0.5, 8).unwrap() as f64, 9.0),
        ("block(1, 4)", block_bound(1.0, 4).unwrap().raw, 0.020_688_746_712_178_444),
        ("block(2, 4)", block_bound(2.0, 4).unwrap().raw, 0.008_123_474_796_279_835_9),
        ("J(1, 2^-10)", local_deviation_bound(1.0, 1.0 / 1024.0).unwrap().clamped, 0.355_416_415_307_368_24),
        ("J(2, 2^-10)", local_deviation_bound(2.0, 1.0 / 1024.0).unwrap().clamped, 0.122_347_690_238_498_04),
        ("J(0.1, 2^-5) raw", local_deviation_bound(0.1, 1.0 / 32.0).unwrap().raw, 10.974_853_979_651_708),
    ];
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (name, got, want) in &cases {
        let rel = (got - want).abs() / want.abs();
        worst = worst.max(rel);
        if rel > 1e-9 {
            bad.push(*name);
        }
    }
    let clamp = local_deviation_bound(0.1, 1.0 / 32.0).unwrap();
    let ok = bad.is_empty() && clamp.vacuous && clamp.clamped == 1.0;
    outcome(
        ok,
        format!(
            "{} values, max rel err {worst:.1e} <= 1e-9 (5 s.f. needs 5e-5){}; printed decimals off at 5 s.f.: \
             s(2^-10,0.5), fixed_delta(2,2^-5), truncated_local(1,2^-4,4), J(2,2^-10)",
            cases.len(),
            if bad.is_empty() { String::new() } else { format!(", mismatches {bad:?}") }
        ),
    )
}

fn constants_audit() -> Outcome {
    let i1 = bounds::series_audit(1, 1.0).unwrap();
    let i2 = bounds::series_audit(2, 1.0).unwrap();
    let ok = i1.direct_sum == 2.59375 && (i2.direct_sum - 3.08203125).abs() <= 1e-12;
    outcome(
        ok,
        format!(
            "I1(1) = {} (exact 2.59375), I2(1) = {} (exact 3.08203125), tol 1e-12; informational: I1(1) {} claimed bound {:.6}",
            i1.direct_sum,
            i2.direct_sum,
            if i1.consistent { "<=" } else { "exceeds" },
            i1.claimed_bound
        ),
    )
}

fn verdict_machinery() -> Outcome {
    let dir = std::env::temp_dir().join(format!("levy-modulus-acceptance-{}", std::process::id()));
    let out = Command::new(env!("CARGO_BIN_EXE_levy-modulus"))
        .args([
            "--out-dir",
            dir.to_str().unwrap(),
            "verify",
            "--theorem",
            "truncated-global",
            "--eps",
            "1",
            "--delta",
            "2^-5",
            "--n",
            "4",
            "--trials",
            "2000",
            "--bound-scale",
            "1e-6",
        ])
        .output()
        .unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    let text = String::from_utf8_lossy(&out.stdout);
    let code = out.status.code();
    outcome(
        code == Some(3) && text.contains("verdict=violated"),
        format!("bound x 1e-6: exit code {code:?} (want 3), verdict violated reported"),
    )
}

fn line(id: u32, name: &str, o: &Outcome) {
    println!("criterion {id:>2} {name:<34} {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn main() -> ExitCode {
    // `cargo test` forwards harness flags such as --list; answer them quietly.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut check = |id: u32, name: &str, o: Outcome| {
        line(id, name, &o);
        if !o.pass {
            failed.push(id);
        }
    };
    check(1, "oracle equivalence", oracle_equivalence());
    check(2, "structural invariants", structural_invariants());
    check(3, "scaling identity", scaling_identity());
    check(11, "bound-evaluator regression", regression());
    check(12, "constants audit", constants_audit());
    check(13, "verdict machinery", verdict_machinery());
    check(4, "truncated global bound", truncated_global());
    check(5, "truncated local bound", truncated_local());
    check(6, "tail estimate", tail());
    let (block, explained) = block_local();
    line(10, "block corollary", &block);
    check(7, "fixed-δ bound (bracketed)", fixed_delta());
    check(8, "uniform bound (bracketed)", uniform());
    check(9, "local deviation (bracketed)", local_deviation());
    println!(
        "criterion 10 is unattainable as stated; analytic explanation {} | total {:.0}s",
        if explained { "holds" } else { "DOES NOT hold" },
        start.elapsed().as_secs_f64()
    );
    if failed.is_empty() && explained {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
