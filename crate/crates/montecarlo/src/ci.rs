//! Exact (Clopper–Pearson) binomial confidence intervals.

use statrs::function::beta::beta_reg;

/// Two-sided interval for a success probability after `k` successes in `n`
/// trials at confidence `level`: each tail gets `(1 - level) / 2`.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n, "need 0 <= k <= n, n > 0");
    let alpha = 1.0 - level;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        // P(Bin(n, p) >= k) = I_p(k, n - k + 1); solve = alpha / 2.
        solve_increasing(|p| beta_reg(kf, nf - kf + 1.0, p), alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        // P(Bin(n, p) <= k) = 1 - I_p(k + 1, n - k); solve = alpha / 2.
        solve_increasing(|p| beta_reg(kf + 1.0, nf - kf, p), 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Root of `f(p) = target` for `f` increasing on `[0, 1]`, by bisection to
/// machine precision.
fn solve_increasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Probability that the interval covers `p` when `k ~ Bin(n, p)`, summed
/// exactly over all outcomes.
pub fn exact_coverage(n: u64, p: f64, level: f64) -> f64 {
    use statrs::distribution::{Binomial, Discrete};
    let b = Binomial::new(p, n).expect("valid binomial");
    (0..=n)
        .filter(|&k| {
            let (lo, hi) = clopper_pearson(k, n, level);
            lo <= p && p <= hi
        })
        .map(|k| b.pmf(k))
        .sum()
}
