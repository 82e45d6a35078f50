//! Brute-force grid oracle.
//!
//! The path is evaluated by direct Schauder summation (independently of the
//! node table) on a regular grid of step `r`, and statistics are maximised
//! over grid points only. Since the grid is a subset of the feasible set,
//! the oracle never exceeds the exact supremum. Conversely, with `M` the
//! largest cell slope of the path:
//!
//! * fixed denominator `D`: moving both ends of the optimal pair down to
//!   the grid changes the numerator by less than `2 M r`, so the shortfall
//!   is at most `2 M r / D`;
//! * gap denominators increasing on `(0, δ]` with `x / D(x)` increasing:
//!   taking `t' = r floor(t*/r)` and `s' = t' + r max(1, floor((s*-t*)/r))`
//!   moves the numerator by less than `3 M r`, giving a shortfall of at most
//!   `4 M r / D(r)`;
//! * local statistics: every candidate is a dyadic node or `δ`, so the
//!   shortfall is zero when `δ` is on the grid and otherwise bounded by the
//!   loss at `δ` itself, which is computed exactly.

use levy_ciesielski::{evaluate_series, TruncatedPath};
use modulus_core::h_unchecked;

use crate::{whole_cells, DenominatorKind, GlobalDenom, LocalDenom, Result, SupError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    /// Documented upper bound on `exact - value`.
    pub slack: f64,
}

pub struct GridOracle<'p> {
    path: &'p TruncatedPath,
    res: f64,
    values: Vec<f64>,
    /// `gap_max[g] = max_i |w[i+g] - w[i]|`.
    gap_max: Vec<f64>,
    max_slope: f64,
}

impl<'p> GridOracle<'p> {
    /// Oracle on the grid of step `resolution`, prepared for band widths up
    /// to `max_delta` (use 0 for local statistics only). The resolution must
    /// be `2^-k` with `2^-k <= 2^-(n+4)`.
    pub fn new(path: &'p TruncatedPath, resolution: f64, max_delta: f64) -> Result<Self> {
        let limit = (-(path.level_n() as f64 + 4.0)).exp2();
        if !(resolution > 0.0 && resolution <= limit) {
            return Err(SupError::Resolution(resolution, "must not exceed 2^-(n+4)"));
        }
        let inv = 1.0 / resolution;
        if inv.fract() != 0.0 || !(inv as u64).is_power_of_two() {
            return Err(SupError::Resolution(resolution, "must be a power of two"));
        }
        let n = inv as usize;
        let values: Vec<f64> = (0..=n)
            .map(|i| evaluate_series(path.coeffs(), i as f64 * resolution))
            .collect();
        let gmax = whole_cells(max_delta.max(0.0), resolution).min(n);
        let gap_max = (0..=gmax).map(|g| max_abs_diff(&values, g)).collect();
        Ok(Self {
            path,
            res: resolution,
            values,
            gap_max,
            max_slope: path.grid().max_slope(),
        })
    }

    pub fn resolution(&self) -> f64 {
        self.res
    }

    pub fn global(&self, delta: f64, kind: DenominatorKind) -> Result<OracleValue> {
        let den = GlobalDenom::new(kind, delta)?;
        let q = whole_cells(delta, self.res);
        if q >= self.gap_max.len() {
            return Err(SupError::Resolution(self.res, "oracle was prepared for a narrower band"));
        }
        let mut value = 0.0f64;
        for g in 1..=q {
            value = value.max(self.gap_max[g] / den.at(g as f64 * self.res));
        }
        let slack = match den {
            GlobalDenom::Const(d) => 2.0 * self.max_slope * self.res / d,
            _ => {
                if delta > (-1.0f64).exp() {
                    return Err(SupError::Domain {
                        name: "delta",
                        value: delta,
                        domain: "(0, 1/e] for the gap-denominator oracle",
                    });
                }
                4.0 * self.max_slope * self.res / den.at(self.res)
            }
        };
        Ok(OracleValue { value, slack })
    }

    pub fn local(&self, delta: f64, kind: DenominatorKind) -> Result<OracleValue> {
        let den = LocalDenom::new(kind)?;
        let last = ((delta / self.res).floor() as usize).min(self.values.len() - 1);
        let mut value = 0.0f64;
        let mut at_last = f64::NEG_INFINITY;
        for i in 1..=last {
            let t = i as f64 * self.res;
            let v = self.values[i] / den.at(t);
            value = value.max(v);
            at_last = v;
        }
        let gap = delta - last as f64 * self.res;
        let slack = if gap <= 1e-12 * delta {
            0.0
        } else {
            let end = evaluate_series(self.path.coeffs(), delta) / den.at(delta);
            (end - at_last.max(0.0)).max(0.0)
        };
        Ok(OracleValue { value, slack })
    }

    /// `max W_t / h(t)` over grid points of the closed block `[2^-(m+1), 2^-m]`.
    pub fn block(&self, m: u32) -> OracleValue {
        let hi = (-(m as f64)).exp2();
        let (i0, i1) = ((hi / 2.0 / self.res).round() as usize, (hi / self.res).round() as usize);
        let value = (i0..=i1)
            .map(|i| self.values[i] / h_unchecked(i as f64 * self.res))
            .fold(f64::NEG_INFINITY, f64::max);
        OracleValue { value, slack: 0.0 }
    }
}

/// `max_i |w[i+g] - w[i]|`, with independent accumulators so the loop vectorises.
fn max_abs_diff(w: &[f64], g: usize) -> f64 {
    if g == 0 || g >= w.len() {
        return 0.0;
    }
    let a = &w[..w.len() - g];
    let b = &w[g..];
    let mut acc = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..8 {
            let d = (y[l] - x[l]).abs();
            acc[l] = if d > acc[l] { d } else { acc[l] };
        }
    }
    let mut m = acc.iter().fold(0.0f64, |p, &q| p.max(q));
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        m = m.max((y - x).abs());
    }
    m
}

/// One-shot oracle value for any statistic kind.
pub fn grid_oracle(path: &TruncatedPath, delta: f64, kind: DenominatorKind, resolution: f64) -> Result<f64> {
    if kind.is_global() {
        GridOracle::new(path, resolution, delta)?.global(delta, kind).map(|o| o.value)
    } else {
        GridOracle::new(path, resolution, 0.0)?.local(delta, kind).map(|o| o.value)
    }
}
