//! Exact suprema of normalised increment statistics of a truncated path.
//!
//! `W^n` is affine on cells of width `h = 2^-(n+1)`, so every statistic here
//! is maximised at finitely many extreme points:
//!
//! * band statistics `|W_s - W_t| / D` over `0 < s - t <= δ`: node pairs with
//!   gap at most `δ`, plus the pairs `(t, t + δ)` with `t` or `t + δ` on a node
//!   (these are the band-line vertices of the cell-pair polygons, see
//!   [`candidates`]);
//! * one-sided local statistics `W_t / D(t)`: the nodes in the range and its
//!   endpoints.
//!
//! [`global_band_sup_enumerated`] walks the polygon vertices cell pair by cell
//! pair and is the reference for small paths; [`global_band_sup`] evaluates
//! the same candidate set with a sliding window or branch and bound and is
//! what the Monte Carlo code uses.

pub mod candidates;
mod oracle;
pub mod search;

pub use oracle::{grid_oracle, GridOracle, OracleValue};

use bounds::m_of_epsilon;
use levy_ciesielski::{NodeGrid, TruncatedPath};
use modulus_core::{
    g_times_r, g_unchecked, global_correction, h_unchecked, s_unchecked, scaled_correction, DELTA_MAX,
    LOCAL_T_MAX,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::search::{GapObjective, PairMax};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SupError {
    #[error("{name} = {value} outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("statistic kind {0:?} is not valid here")]
    InvalidKind(DenominatorKind),
    #[error("path truncated at level {found}, statistic needs level {expected}")]
    LevelMismatch { expected: u32, found: u32 },
    #[error("oracle resolution {0}: {1}")]
    Resolution(f64, &'static str),
    #[error(transparent)]
    Bound(#[from] bounds::BoundError),
    #[error(transparent)]
    Modulus(#[from] modulus_core::ModulusError),
}

pub type Result<T> = std::result::Result<T, SupError>;

fn domain(name: &'static str, value: f64, domain: &'static str) -> SupError {
    SupError::Domain { name, value, domain }
}

/// Denominator of a statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenominatorKind {
    /// `g(s - t)`
    GapGlobal,
    /// `g(δ) r(δ)`
    FixedGlobal,
    /// `g(s - t) r(s - t)`
    GapGlobalCorrected,
    /// `h(t)`
    LocalPlain,
    /// `h(t) s(t, ε)`
    LocalCorrected { epsilon: f64 },
}

impl DenominatorKind {
    pub const GLOBAL: [DenominatorKind; 3] = [
        DenominatorKind::GapGlobal,
        DenominatorKind::FixedGlobal,
        DenominatorKind::GapGlobalCorrected,
    ];

    pub fn is_global(&self) -> bool {
        matches!(self, Self::GapGlobal | Self::FixedGlobal | Self::GapGlobalCorrected)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::GapGlobal => "gap_global",
            Self::FixedGlobal => "fixed_global",
            Self::GapGlobalCorrected => "gap_global_corrected",
            Self::LocalPlain => "local_plain",
            Self::LocalCorrected { .. } => "local_corrected",
        }
    }
}

/// Result of an exact supremum computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSupremum {
    pub value: f64,
    pub arg_t: f64,
    /// Equal to `arg_t` for local statistics.
    pub arg_s: f64,
    /// Cell containing `arg_t` (the cell to its right when `arg_t` is a node).
    pub cell_k: usize,
    /// Offset of the cell ending at or containing `arg_s`, relative to `cell_k`.
    pub cell_l: usize,
    pub kind: DenominatorKind,
    /// False when the value is only approached: the `t -> 0` limit of a
    /// local statistic, or the excluded right end of a block.
    pub attained: bool,
}

/// Global denominator as a function of the gap.
#[derive(Debug, Clone, Copy)]
pub(crate) enum GlobalDenom {
    Const(f64),
    Gap,
    GapCorrected,
}

impl GlobalDenom {
    pub(crate) fn new(kind: DenominatorKind, delta: f64) -> Result<Self> {
        match kind {
            DenominatorKind::GapGlobal => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(domain("delta", delta, "(0, 1)"));
                }
                Ok(Self::Gap)
            }
            DenominatorKind::FixedGlobal => {
                check_corrected_delta(delta)?;
                Ok(Self::Const(g_unchecked(delta) * global_correction(delta)?))
            }
            DenominatorKind::GapGlobalCorrected => {
                check_corrected_delta(delta)?;
                Ok(Self::GapCorrected)
            }
            other => Err(SupError::InvalidKind(other)),
        }
    }

    #[inline]
    pub(crate) fn at(&self, gap: f64) -> f64 {
        match *self {
            Self::Const(c) => c,
            Self::Gap => g_unchecked(gap),
            Self::GapCorrected => g_times_r(gap),
        }
    }
}

fn check_corrected_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= DELTA_MAX {
        Ok(())
    } else {
        Err(domain("delta", delta, "(0, 2^-5]"))
    }
}

/// Local denominator as a function of time.
#[derive(Debug, Clone, Copy)]
pub enum LocalDenom {
    Plain,
    Corrected(f64),
}

impl LocalDenom {
    pub fn new(kind: DenominatorKind) -> Result<Self> {
        match kind {
            DenominatorKind::LocalPlain => Ok(Self::Plain),
            DenominatorKind::LocalCorrected { epsilon } if epsilon > 0.0 && epsilon.is_finite() => {
                Ok(Self::Corrected(epsilon))
            }
            DenominatorKind::LocalCorrected { epsilon } => Err(domain("epsilon", epsilon, "(0, inf)")),
            other => Err(SupError::InvalidKind(other)),
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Self::Plain => h_unchecked(t),
            Self::Corrected(e) => h_unchecked(t) * s_unchecked(t, e),
        }
    }
}

/// Number of whole cells of width `h` fitting in `delta`, robust to the
/// rounding of dyadic ratios.
pub fn whole_cells(delta: f64, h: f64) -> usize {
    let r = delta / h;
    let q = r.round();
    if (r - q).abs() <= 1e-9 * r.max(1.0) {
        q as usize
    } else {
        r.floor() as usize
    }
}

fn on_grid(delta: f64, h: f64) -> bool {
    let r = delta / h;
    (r - r.round()).abs() <= 1e-9 * r.max(1.0)
}

/// Supremum of a pair statistic and the pair attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSup {
    pub value: f64,
    pub t: f64,
    pub s: f64,
}

/// Supremum of `(|W_s - W_t| + offset) / D(max(s - t, gap_floor))` over
/// `0 <= t < s <= horizon`, `s - t <= delta`, for a path that is affine
/// between the grid nodes. `denom` must be unimodal in the gap (increasing,
/// then possibly decreasing) on `(0, delta]`.
///
/// With `offset = 0` and `gap_floor = 0` this is the plain band statistic.
/// The offset and floor serve the pessimistic brackets of the Monte Carlo
/// experiments.
pub fn sup_gap_ratio(
    grid: NodeGrid<'_>,
    delta: f64,
    denom: impl Fn(f64) -> f64,
    offset: f64,
    gap_floor: f64,
) -> PairSup {
    sup_gap_ratios(grid, delta, &[GapSpec { denom: &denom, offset, gap_floor }])[0]
}

/// One objective for [`sup_gap_ratios`]: maximise
/// `(|W(s) - W(t)| + offset) / denom(max(s - t, gap_floor))`.
#[derive(Clone, Copy)]
pub struct GapSpec<'a> {
    pub denom: &'a dyn Fn(f64) -> f64,
    pub offset: f64,
    pub gap_floor: f64,
}

/// Several objectives over the same band `0 < s - t <= delta`, sharing the
/// search pyramid built from `grid`.
pub fn sup_gap_ratios(grid: NodeGrid<'_>, delta: f64, specs: &[GapSpec<'_>]) -> Vec<PairSup> {
    let h = grid.step;
    let horizon = grid.horizon();
    let cells = grid.cells();
    let q = whole_cells(delta, h).min(cells);
    let mut search: Option<search::GapSearch<'_>> = None;
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let eff = |gap: f64| (spec.denom)(gap.max(spec.gap_floor));
        let offset = spec.offset;

        // Pairs with one end on a node and gap exactly δ.
        let mut band = PairSup {
            value: f64::NEG_INFINITY,
            t: 0.0,
            s: 0.0,
        };
        if !on_grid(delta, h) && delta < horizon {
            let inv = 1.0 / eff(delta);
            for i in 0..=cells {
                let x = i as f64 * h;
                for (t, s) in [(x, x + delta), (x - delta, x)] {
                    if t >= 0.0 && s <= horizon {
                        let v = ((grid.at(s) - grid.at(t)).abs() + offset) * inv;
                        if v > band.value {
                            band = PairSup { value: v, t, s };
                        }
                    }
                }
            }
        }
        if q == 0 {
            out.push(band);
            continue;
        }

        let inv: Vec<f64> = (0..=q)
            .map(|g| if g == 0 { 0.0 } else { 1.0 / eff(g as f64 * h) })
            .collect();
        let pm = if inv[1..].iter().all(|&x| x == inv[1]) {
            let r = search::max_range_within(grid.values, q);
            PairMax {
                value: (r.value + offset) * inv[1],
                ..r
            }
        } else {
            let seed = PairMax {
                value: band.value,
                i: usize::MAX,
                j: usize::MAX,
            };
            let gs = search.get_or_insert_with(|| search::GapSearch::new(grid.values, q));
            gs.maximize(&GapObjective { inv_denom: &inv, offset }, seed)
        };
        out.push(if pm.i == usize::MAX || pm.value <= band.value {
            band
        } else {
            PairSup {
                value: pm.value,
                t: pm.i as f64 * h,
                s: pm.j as f64 * h,
            }
        });
    }
    out
}

fn cells_of(t: f64, s: f64, h: f64, cells: usize) -> (usize, usize) {
    let k = ((t / h).floor() as usize).min(cells.saturating_sub(1));
    let ks = ((s / h).ceil() as usize).saturating_sub(1);
    (k, ks.saturating_sub(k))
}

/// Exact supremum of `|W_s - W_t| / D` over the band `0 <= t < s <= 1`,
/// `s - t <= delta`, for a global denominator kind.
pub fn global_band_sup(path: &TruncatedPath, delta: f64, kind: DenominatorKind) -> Result<BandSupremum> {
    global_band_sup_grid(path.grid(), delta, kind)
}

/// [`global_band_sup`] for any node grid starting at time 0.
pub fn global_band_sup_grid(grid: NodeGrid<'_>, delta: f64, kind: DenominatorKind) -> Result<BandSupremum> {
    let den = GlobalDenom::new(kind, delta)?;
    let p = sup_gap_ratio(grid, delta, |g| den.at(g), 0.0, 0.0);
    let (cell_k, cell_l) = cells_of(p.t, p.s, grid.step, grid.cells());
    Ok(BandSupremum {
        value: p.value,
        arg_t: p.t,
        arg_s: p.s,
        cell_k,
        cell_l,
        kind,
        attained: true,
    })
}

/// Reference implementation: evaluates every polygon vertex in
/// `(k, l, vertex)` order; the first maximiser wins ties.
pub fn global_band_sup_enumerated(
    path: &TruncatedPath,
    delta: f64,
    kind: DenominatorKind,
) -> Result<BandSupremum> {
    let den = GlobalDenom::new(kind, delta)?;
    let grid = path.grid();
    let mut best: Option<(f64, candidates::Candidate)> = None;
    for c in candidates::enumerate(grid.cells(), grid.step, delta) {
        let v = (grid.at(c.s) - grid.at(c.t)).abs() / den.at(c.s - c.t);
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, c));
        }
    }
    let (value, c) = best.expect("a path has at least one cell");
    Ok(BandSupremum {
        value,
        arg_t: c.t,
        arg_s: c.s,
        cell_k: c.k,
        cell_l: c.l,
        kind,
        attained: true,
    })
}

/// `sup_{δ <= δ0} sup_{|s-t| <= δ} |W_s - W_t| / (g(δ) r(δ))`. Since `g r` is
/// increasing on `(0, 2^-5]`, each pair is best served by `δ = s - t`, and
/// the double supremum is the band supremum with denominator `g(s-t) r(s-t)`.
pub fn uniform_band_sup(path: &TruncatedPath, delta0: f64) -> Result<BandSupremum> {
    global_band_sup(path, delta0, DenominatorKind::GapGlobalCorrected)
}

/// Statistic value of a single pair under a global kind.
pub fn global_statistic_at(path: &TruncatedPath, t: f64, s: f64, delta: f64, kind: DenominatorKind) -> Result<f64> {
    let den = GlobalDenom::new(kind, delta)?;
    Ok((path.evaluate(s).map_err(|_| domain("s", s, "[0, 1]"))? - path.evaluate(t).map_err(|_| domain("t", t, "[0, 1]"))?).abs()
        / den.at(s - t))
}

/// Supremum of `(W_t + offset) / D(t)` over the candidate times of
/// `[t_lo, t_hi]`: both ends (when positive) and every node strictly inside. Returns the
/// best value and its time.
pub fn sup_local_ratio(grid: NodeGrid<'_>, t_lo: f64, t_hi: f64, den: LocalDenom, offset: f64) -> (f64, f64) {
    let h = grid.step;
    let mut best = (f64::NEG_INFINITY, t_lo);
    let mut offer = |t: f64| {
        if t > 0.0 {
            let v = (grid.at(t) + offset) / den.at(t);
            if v > best.0 {
                best = (v, t);
            }
        }
    };
    offer(t_lo);
    let first = (t_lo / h).floor() as usize + 1;
    let last = ((t_hi / h).ceil() as usize).min(grid.cells());
    for i in first..=last {
        let t = i as f64 * h;
        if t < t_hi {
            offer(t);
        }
    }
    offer(t_hi);
    best
}

fn local_result(value: f64, t: f64, attained: bool, h: f64, kind: DenominatorKind) -> BandSupremum {
    BandSupremum {
        value,
        arg_t: t,
        arg_s: t,
        cell_k: ((t / h).ceil() as usize).saturating_sub(1),
        cell_l: 0,
        kind,
        attained,
    }
}

/// Exact `sup_{0 < t <= delta} W_t / D(t)` for a local kind. The
/// statistic tends to 0 as `t -> 0`, so the supremum is never negative; a
/// value of 0 with `attained = false` means every candidate was negative.
pub fn local_sup(path: &TruncatedPath, delta: f64, kind: DenominatorKind) -> Result<BandSupremum> {
    local_sup_grid(path.grid(), delta, kind)
}

/// [`local_sup`] for any node grid starting at time 0 (for example a window).
pub fn local_sup_grid(grid: NodeGrid<'_>, delta: f64, kind: DenominatorKind) -> Result<BandSupremum> {
    let den = LocalDenom::new(kind)?;
    let ok = match den {
        LocalDenom::Plain => delta > 0.0 && delta <= LOCAL_T_MAX,
        LocalDenom::Corrected(_) => delta > 0.0 && delta < LOCAL_T_MAX,
    };
    if !ok {
        return Err(domain("delta", delta, "(0, 2^-4]"));
    }
    if delta > grid.horizon() * (1.0 + 1e-12) {
        return Err(domain("delta", delta, "within the sampled window"));
    }
    let (v, t) = sup_local_ratio(grid, 0.0, delta, den, 0.0);
    if v < 0.0 {
        Ok(local_result(0.0, 0.0, false, grid.step, kind))
    } else {
        Ok(local_result(v, t, true, grid.step, kind))
    }
}

/// Block statistic `sup W_t / h(t)` over `[2^-(m+1), 2^-m)` for a path of
/// level `m(ε)`. The supremum is taken over the closed block; `attained` is
/// false when it sits at the excluded right end.
pub fn block_sup(path: &TruncatedPath, m: u32, epsilon: f64) -> Result<BandSupremum> {
    let expected = m_of_epsilon(epsilon, m)?;
    if path.level_n() != expected {
        return Err(SupError::LevelMismatch {
            expected,
            found: path.level_n(),
        });
    }
    block_sup_grid(path.grid(), m)
}

/// [`block_sup`] on a node grid whose nodes include both block ends.
pub fn block_sup_grid(grid: NodeGrid<'_>, m: u32) -> Result<BandSupremum> {
    if m < 4 {
        return Err(domain("m", m as f64, "[4, inf)"));
    }
    let hi = (-(m as f64)).exp2();
    let lo = hi / 2.0;
    if grid.step > lo || hi > grid.horizon() * (1.0 + 1e-12) {
        return Err(domain("m", m as f64, "block resolved by the grid"));
    }
    let h = grid.step;
    let (i0, i1) = ((lo / h).round() as usize, (hi / h).round() as usize);
    let mut best = (f64::NEG_INFINITY, i0);
    for i in i0..=i1 {
        let t = i as f64 * h;
        let v = grid.values[i] / h_unchecked(t);
        if v > best.0 {
            best = (v, i);
        }
    }
    let t = best.1 as f64 * h;
    Ok(local_result(best.0, t, best.1 != i1, h, DenominatorKind::LocalPlain))
}

/// Fixed-δ statistic of `B_s = sqrt(T) W_{s/T}` on `[0, T]`:
/// `sup_{|s-t| <= δ} |B_s - B_t| / (g(δ) r(δ, T) sqrt(1 + ε))`.
pub fn horizon_fixed_statistic(path: &TruncatedPath, delta: f64, horizon_t: f64, epsilon: f64) -> Result<f64> {
    let r = scaled_correction(delta, horizon_t)?;
    let sqrt_t = horizon_t.sqrt();
    let b: Vec<f64> = path.node_values().iter().map(|w| sqrt_t * w).collect();
    let grid = NodeGrid::new(&b, horizon_t * path.cell_width());
    let p = sup_gap_ratio(grid, delta, |_| 1.0, 0.0, 0.0);
    Ok(p.value / (g_unchecked(delta) * r * (1.0 + epsilon).sqrt()))
}

/// Unit-interval counterpart: `sup_{|s-t| <= δ/T} |W_s - W_t| / (g(δ/T) r(δ/T) sqrt(1 + ε))`.
pub fn unit_fixed_statistic(path: &TruncatedPath, delta_unit: f64, epsilon: f64) -> Result<f64> {
    let b = global_band_sup(path, delta_unit, DenominatorKind::FixedGlobal)?;
    Ok(b.value / (1.0 + epsilon).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use levy_ciesielski::HaarCoefficients;

    fn linear(c: f64, n: u32) -> TruncatedPath {
        let mut co = HaarCoefficients::zeros(n);
        co.x0 = c;
        TruncatedPath::new(co).unwrap()
    }

    #[test]
    fn zero_path_gives_zero() {
        let z = TruncatedPath::zero(5);
        for kind in DenominatorKind::GLOBAL {
            assert_eq!(global_band_sup(&z, 1.0 / 32.0, kind).unwrap().value, 0.0);
        }
        assert_eq!(local_sup(&z, 1.0 / 32.0, DenominatorKind::LocalPlain).unwrap().value, 0.0);
        assert_eq!(uniform_band_sup(&z, 1.0 / 32.0).unwrap().value, 0.0);
    }

    #[test]
    fn linear_path_closed_forms() {
        let d = 1.0 / 64.0;
        let p = linear(3.0, 5);
        let b = global_band_sup(&p, d, DenominatorKind::GapGlobal).unwrap();
        assert!((b.value - 0.130_025_314_882_977_85).abs() < 1e-12);
        assert!((b.arg_s - b.arg_t - d).abs() < 1e-15);

        let d0 = 1.0 / 32.0;
        let u = uniform_band_sup(&linear(1.0, 6), d0).unwrap();
        assert!((u.value - d0 / g_times_r(d0)).abs() < 1e-12);
        assert!((3.0 * u.value - 0.083_118_173_527_206_726).abs() < 1e-12);

        let l = local_sup(&linear(1.0, 6), d0, DenominatorKind::LocalPlain).unwrap();
        assert!((l.value - 0.112_121_152_361_300_91).abs() < 1e-12);
        assert_eq!(l.arg_t, d0);
    }

    #[test]
    fn negative_local_path_reports_limit() {
        let p = linear(-1.0, 4);
        let l = local_sup(&p, 1.0 / 32.0, DenominatorKind::LocalPlain).unwrap();
        assert_eq!(l.value, 0.0);
        assert!(!l.attained);
    }

    #[test]
    fn kind_and_domain_errors() {
        let p = TruncatedPath::sample(4, 1);
        assert!(matches!(
            global_band_sup(&p, 0.01, DenominatorKind::LocalPlain),
            Err(SupError::InvalidKind(_))
        ));
        assert!(local_sup(&p, 0.01, DenominatorKind::GapGlobal).is_err());
        assert!(global_band_sup(&p, 0.05, DenominatorKind::FixedGlobal).is_err());
        assert!(global_band_sup(&p, 0.05, DenominatorKind::GapGlobal).is_ok());
        assert!(local_sup(&p, 1.0 / 16.0, DenominatorKind::LocalCorrected { epsilon: 1.0 }).is_err());
        assert!(matches!(block_sup(&p, 5, 1.0), Err(SupError::LevelMismatch { expected: 6, found: 4 })));
    }

    #[test]
    fn block_on_linear_path_sits_at_open_end() {
        let p = linear(1.0, m_of_epsilon(2.0, 5).unwrap());
        let b = block_sup(&p, 5, 2.0).unwrap();
        assert!((b.value - 0.112_121_152_361_300_91).abs() < 1e-12);
        assert!(!b.attained);
        assert_eq!(b.arg_t, 1.0 / 32.0);
    }

    #[test]
    fn whole_cells_rounding() {
        assert_eq!(whole_cells(1.0 / 32.0, 1.0 / 524_288.0), 16_384);
        assert_eq!(whole_cells(0.3, 0.1), 3);
        assert_eq!(whole_cells(0.25, 0.1), 2);
    }
}
