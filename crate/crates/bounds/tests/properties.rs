use bounds::*;
use proptest::prelude::*;

fn eps_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.01f64..20.0, 0.0f64..5.0).prop_map(|(a, d)| (a, a + d))
}

proptest! {
    #[test]
    fn clamp_invariant(eps in 0.01f64..10.0, ld in 5.0f64..60.0, n in 4u32..30) {
        let delta = (-ld).exp2();
        for b in [
            truncated_global_bound(eps, delta, n).unwrap(),
            fixed_delta_bound(eps, delta).unwrap(),
            uniform_bound(eps, delta).unwrap(),
            tail_bound(n, eps).unwrap(),
        ] {
            prop_assert!(b.raw >= 0.0);
            prop_assert!((0.0..=1.0).contains(&b.clamped));
            prop_assert_eq!(b.vacuous, b.raw >= 1.0);
            prop_assert_eq!(b.clamped, b.raw.min(1.0));
        }
    }

    #[test]
    fn nonincreasing_in_epsilon((e1, e2) in eps_pair(), ld in 5.0f64..40.0, n in 4u32..24) {
        let delta = (-ld).exp2();
        let pairs = [
            (truncated_global_bound(e1, delta, n).unwrap().raw, truncated_global_bound(e2, delta, n).unwrap().raw),
            (fixed_delta_bound(e1, delta).unwrap().raw, fixed_delta_bound(e2, delta).unwrap().raw),
            (uniform_bound(e1, delta).unwrap().raw, uniform_bound(e2, delta).unwrap().raw),
            (tail_bound(n, e1).unwrap().raw, tail_bound(n, e2).unwrap().raw),
        ];
        for (a, b) in pairs {
            prop_assert!(b <= a * (1.0 + 1e-12));
        }
        let dl = (-(ld.max(6.0))).exp2();
        prop_assert!(truncated_local_bound(e2, dl, n).unwrap().raw <= truncated_local_bound(e1, dl, n).unwrap().raw * (1.0 + 1e-12));
        prop_assert!(local_deviation_bound(e2, dl).unwrap().raw <= local_deviation_bound(e1, dl).unwrap().raw * (1.0 + 1e-12));
    }

    #[test]
    fn block_bound_nonincreasing_at_fixed_level(e1 in 0.05f64..10.0, frac in 0.0f64..1e-3, m in 4u32..40) {
        let e2 = e1 * (1.0 + frac);
        if m_of_epsilon(e1, m).unwrap() == m_of_epsilon(e2, m).unwrap() && (e1 <= 1.0) == (e2 <= 1.0) {
            prop_assert!(block_bound(e2, m).unwrap().raw <= block_bound(e1, m).unwrap().raw * (1.0 + 1e-12));
        }
    }

    #[test]
    fn m_of_epsilon_at_least_m(eps in 1e-3f64..50.0, m in 1u32..200) {
        let me = m_of_epsilon(eps, m).unwrap();
        prop_assert!(me >= m);
    }

    #[test]
    fn serialisation_round_trip(eps in 0.1f64..5.0, ld in 5.0f64..20.0) {
        let b = uniform_bound(eps, (-ld).exp2()).unwrap();
        let back: BoundEvaluation = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        prop_assert_eq!(back, b);
    }
}
