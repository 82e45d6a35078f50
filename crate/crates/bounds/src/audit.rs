//! Direct summation of the series `I_k(ε) = sum_{m>=0} 2^(-ε m) (1 + m/8)^(k+ε)`
//! against the closed-form upper bounds claimed for it.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::{a_const, positive, require, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesAudit {
    pub k: u32,
    pub epsilon: f64,
    pub direct_sum: f64,
    /// Upper bound on the neglected tail, already included in `direct_sum`.
    pub remainder_bound: f64,
    pub terms: u64,
    pub claimed_bound: f64,
    pub consistent: bool,
}

#[inline]
fn term(k: u32, eps: f64, m: u64) -> f64 {
    let mf = m as f64;
    (-eps * mf).exp2() * (1.0 + mf / 8.0).powf(k as f64 + eps)
}

/// Sum of the first `terms` terms.
pub fn series_partial_sum(k: u32, epsilon: f64, terms: u64) -> f64 {
    // Smallest terms first to limit rounding.
    (0..terms).rev().map(|m| term(k, epsilon, m)).sum()
}

/// Number of terms after which the geometric tail bound drops below `tol`,
/// together with that bound.
fn horizon(k: u32, eps: f64, tol: f64) -> (u64, f64) {
    let p = k as f64 + eps;
    let mut m: u64 = 0;
    loop {
        // term ratio t_{j+1}/t_j is decreasing in j, so past m the tail is
        // dominated by a geometric series with ratio rho(m).
        let rho = (-eps).exp2() * ((9.0 + m as f64) / (8.0 + m as f64)).powf(p);
        if rho < 1.0 {
            let next = term(k, eps, m + 1);
            let tail = next / (1.0 - rho);
            if tail < tol {
                return (m + 1, tail);
            }
        }
        m += 1;
        if m > 500_000_000 {
            return (m + 1, f64::INFINITY);
        }
    }
}

pub fn series_audit(k: u32, epsilon: f64) -> Result<SeriesAudit> {
    require(k == 1 || k == 2, "k", k as f64, "in {1, 2}")?;
    positive("epsilon", epsilon)?;
    let (terms, remainder_bound) = horizon(k, epsilon, 1e-15);
    let direct_sum = series_partial_sum(k, epsilon, terms) + remainder_bound;
    let claimed_bound = if epsilon <= 2.0 * a_const() {
        if k == 1 {
            1.15 / epsilon.powf(epsilon + 2.0)
        } else {
            0.70 / epsilon.powf(epsilon + 3.0)
        }
    } else {
        1.0 / (epsilon * LN_2) + 1.0
    };
    Ok(SeriesAudit {
        k,
        epsilon,
        direct_sum,
        remainder_bound,
        terms,
        claimed_bound,
        consistent: direct_sum <= claimed_bound,
    })
}
