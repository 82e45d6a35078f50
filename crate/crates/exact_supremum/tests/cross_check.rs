use bounds::m_of_epsilon;
use exact_supremum::*;
use levy_ciesielski::TruncatedPath;
use modulus_core::g_times_r;
use proptest::prelude::*;

const KINDS: [DenominatorKind; 3] = DenominatorKind::GLOBAL;

#[test]
fn fast_search_agrees_with_polygon_enumeration() {
    for seed in 0..40u64 {
        let n = 2 + (seed % 6) as u32;
        let p = TruncatedPath::sample(n, seed);
        let h = p.cell_width();
        for delta in [1.0 / 32.0, 1.0 / 64.0, 0.73 * h, 1.61 * h, 3.37 * h, 0.02] {
            if delta > 1.0 / 32.0 {
                continue;
            }
            for kind in KINDS {
                let fast = global_band_sup(&p, delta, kind).unwrap();
                let slow = global_band_sup_enumerated(&p, delta, kind).unwrap();
                assert!(
                    (fast.value - slow.value).abs() <= 1e-12 * slow.value.max(1.0),
                    "seed {seed} n {n} delta {delta} {kind:?}: {} vs {}",
                    fast.value,
                    slow.value
                );
            }
        }
    }
}

#[test]
fn argmax_reproduces_value() {
    for seed in 100..130u64 {
        let p = TruncatedPath::sample(5, seed);
        for delta in [1.0 / 32.0, 0.021] {
            for kind in KINDS {
                for b in [global_band_sup(&p, delta, kind).unwrap(), global_band_sup_enumerated(&p, delta, kind).unwrap()] {
                    assert!(b.arg_t >= 0.0 && b.arg_t < b.arg_s && b.arg_s <= 1.0);
                    assert!(b.arg_s - b.arg_t <= delta + 1e-15);
                    let v = global_statistic_at(&p, b.arg_t, b.arg_s, delta, kind).unwrap();
                    assert!((v - b.value).abs() < 1e-12, "seed {seed} {kind:?}");
                }
            }
        }
    }
}

#[test]
fn enumeration_tie_break_is_first_in_scan_order() {
    // A constant slope makes every same-cell candidate tie.
    let mut c = levy_ciesielski::HaarCoefficients::zeros(3);
    c.x0 = 2.0;
    let p = TruncatedPath::new(c).unwrap();
    let b = global_band_sup_enumerated(&p, 0.5 / 16.0, DenominatorKind::GapGlobal).unwrap();
    assert_eq!((b.cell_k, b.cell_l), (0, 0));
    assert_eq!(b.arg_t, 0.0);
}

#[test]
fn oracle_dominated_within_slack_seed_123() {
    let p = TruncatedPath::sample(5, 123);
    let delta = 1.0 / 32.0;
    let mut slacks = Vec::new();
    for res_exp in [12, 14, 16] {
        let oracle = GridOracle::new(&p, (-(res_exp as f64)).exp2(), delta).unwrap();
        let o = oracle.global(delta, DenominatorKind::GapGlobal).unwrap();
        let exact = global_band_sup(&p, delta, DenominatorKind::GapGlobal).unwrap().value;
        assert!(o.value <= exact + 1e-12);
        assert!(exact - o.value <= o.slack);
        slacks.push(o.slack);
    }
    assert!(slacks[0] > slacks[1] && slacks[1] > slacks[2]);
}

#[test]
fn oracle_linear_path_closed_form() {
    let mut c = levy_ciesielski::HaarCoefficients::zeros(4);
    c.x0 = 3.0;
    let p = TruncatedPath::new(c).unwrap();
    let o = GridOracle::new(&p, (-14f64).exp2(), 1.0 / 64.0)
        .unwrap()
        .global(1.0 / 64.0, DenominatorKind::GapGlobal)
        .unwrap();
    assert!((o.value - 0.130_025_314_882_977_85).abs() <= o.slack + 1e-12);
    assert!(grid_oracle(&TruncatedPath::zero(4), 1.0 / 64.0, DenominatorKind::GapGlobal, (-14f64).exp2()).unwrap() == 0.0);
    assert!(GridOracle::new(&p, (-6f64).exp2(), 0.01).is_err());
}

#[test]
fn uniform_matches_scan_over_delta() {
    // For every candidate gap γ, evaluate the fixed-δ statistic at δ = γ;
    // the largest of these equals the single gap-corrected band supremum.
    let p = TruncatedPath::sample(5, 123);
    let d0 = 1.0 / 32.0;
    let u = uniform_band_sup(&p, d0).unwrap();
    let h = p.cell_width();
    let mut scan = 0.0f64;
    let mut gaps: Vec<f64> = vec![h, 2.0 * h];
    for i in 1..200 {
        gaps.push(d0 * i as f64 / 200.0);
    }
    for &g in &gaps {
        let f = global_band_sup(&p, g, DenominatorKind::FixedGlobal).unwrap().value;
        scan = scan.max(f);
    }
    assert!((scan - u.value).abs() < 1e-12, "{scan} vs {}", u.value);

    let mut c = levy_ciesielski::HaarCoefficients::zeros(5);
    c.x0 = 1.0;
    let lin = TruncatedPath::new(c).unwrap();
    assert!((uniform_band_sup(&lin, d0).unwrap().value - d0 / g_times_r(d0)).abs() < 1e-12);
}

#[test]
fn local_matches_oracle_seed_9() {
    let p = TruncatedPath::sample(6, 9);
    let o = GridOracle::new(&p, (-20f64).exp2(), 0.0).unwrap();
    for kind in [DenominatorKind::LocalPlain, DenominatorKind::LocalCorrected { epsilon: 1.0 }] {
        let exact = local_sup(&p, 1.0 / 32.0, kind).unwrap();
        let ov = o.local(1.0 / 32.0, kind).unwrap();
        assert_eq!(ov.slack, 0.0);
        assert!((exact.value - ov.value).abs() < 1e-12, "{kind:?}");
    }
    // Non-dyadic end point: the oracle misses at most its reported slack.
    let d = 0.0301;
    let exact = local_sup(&p, d, DenominatorKind::LocalPlain).unwrap().value;
    let ov = o.local(d, DenominatorKind::LocalPlain).unwrap();
    assert!(ov.value <= exact + 1e-12 && exact - ov.value <= ov.slack + 1e-12);
}

#[test]
fn block_matches_oracle_seed_21() {
    let level = m_of_epsilon(1.0, 5).unwrap();
    let p = TruncatedPath::sample(level, 21);
    let b = block_sup(&p, 5, 1.0).unwrap();
    let o = GridOracle::new(&p, (-20f64).exp2(), 0.0).unwrap().block(5);
    assert!((b.value - o.value).abs() < 1e-12);
}

#[test]
fn scaling_identity() {
    for seed in 0..20u64 {
        let p = TruncatedPath::sample(6, seed);
        for (t, delta) in [(1.0, 1.0 / 32.0), (2.0, 1.0 / 16.0), (4.0, 1.0 / 8.0), (2.0, 0.05)] {
            let a = horizon_fixed_statistic(&p, delta, t, 1.0).unwrap();
            let b = unit_fixed_statistic(&p, delta / t, 1.0).unwrap();
            assert!((a - b).abs() < 1e-12, "seed {seed} T {t}: {a} {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_never_exceeds_exact(seed in any::<u64>(), n in 2u32..6, frac in 0.05f64..1.0) {
        let p = TruncatedPath::sample(n, seed);
        let delta = frac / 32.0;
        let oracle = GridOracle::new(&p, (-13f64).exp2(), delta).unwrap();
        for kind in KINDS {
            let o = oracle.global(delta, kind).unwrap();
            let exact = global_band_sup(&p, delta, kind).unwrap().value;
            prop_assert!(o.value <= exact + 1e-12);
            prop_assert!(exact - o.value <= o.slack + 1e-12);
        }
    }

    #[test]
    fn polygon_candidates_match_search(seed in any::<u64>(), n in 1u32..6, frac in 0.01f64..1.0) {
        let p = TruncatedPath::sample(n, seed);
        let delta = frac / 32.0;
        for kind in KINDS {
            let a = global_band_sup(&p, delta, kind).unwrap().value;
            let b = global_band_sup_enumerated(&p, delta, kind).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }
}
