//! Fast maximisation over all node pairs `(i, j)` with `1 <= j - i <= q`.
//!
//! * Constant denominator: a sliding-window max/min (monotone deques), `O(M)`.
//! * Gap-dependent denominator: branch and bound over a dyadic pyramid of
//!   block maxima and minima. A block pair is discarded as soon as its
//!   range divided by the smallest denominator it can see does not beat the
//!   incumbent.

// Plain comparisons compile to single max/min instructions; inputs are never NaN.
#[inline(always)]
fn fmax(a: f64, b: f64) -> f64 {
    if a > b { a } else { b }
}

#[inline(always)]
fn fmin(a: f64, b: f64) -> f64 {
    if a < b { a } else { b }
}

/// Best pair found so far: objective value and node indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMax {
    pub value: f64,
    pub i: usize,
    pub j: usize,
}

impl PairMax {
    pub const NONE: Self = Self {
        value: f64::NEG_INFINITY,
        i: 0,
        j: 0,
    };

    #[inline]
    fn offer(&mut self, value: f64, i: usize, j: usize) {
        if value > self.value {
            *self = Self { value, i, j };
        }
    }
}

/// Largest `|w[j] - w[i]|` over `1 <= j - i <= q`.
///
/// Window extrema come from block prefix/suffix extrema (van Herk /
/// Gil-Werman): with blocks of length `q + 1`, every window `[j - q, j]`
/// is a suffix of the previous block followed by a prefix of the current
/// one. Only the previous block's suffixes are kept, so the working set
/// stays in cache.
pub fn max_range_within(w: &[f64], q: usize) -> PairMax {
    let n = w.len();
    let mut best = PairMax::NONE;
    if n < 2 || q == 0 {
        return best;
    }
    let q = q.min(n - 1);
    let b = q + 1;
    let mut prev_max = vec![f64::NEG_INFINITY; b];
    let mut prev_min = vec![f64::INFINITY; b];
    let mut cur_max = vec![f64::NEG_INFINITY; b];
    let mut cur_min = vec![f64::INFINITY; b];
    let mut best_val = f64::NEG_INFINITY;
    let mut best_j = 1;
    let mut start = 0;
    while start < n {
        let end = (start + b).min(n);
        let blk = &w[start..end];
        let (mut mx, mut mn) = (f64::NEG_INFINITY, f64::INFINITY);
        for r in (0..blk.len()).rev() {
            mx = fmax(mx, blk[r]);
            mn = fmin(mn, blk[r]);
            cur_max[r] = mx;
            cur_min[r] = mn;
        }
        let (mut px, mut pn) = (f64::NEG_INFINITY, f64::INFINITY);
        for (r, &x) in blk.iter().enumerate() {
            px = fmax(px, x);
            pn = fmin(pn, x);
            // Window [j - q, j] starts at relative index r + 1 of the previous block.
            let (wx, wn) = if r + 1 < b { (fmax(px, prev_max[r + 1]), fmin(pn, prev_min[r + 1])) } else { (px, pn) };
            let v = fmax(wx - x, x - wn);
            if v > best_val && start + r > 0 {
                best_val = v;
                best_j = start + r;
            }
        }
        std::mem::swap(&mut prev_max, &mut cur_max);
        std::mem::swap(&mut prev_min, &mut cur_min);
        start = end;
    }
    let j = best_j;
    for i in j.saturating_sub(q)..j {
        best.offer((w[j] - w[i]).abs(), i, j);
    }
    best
}

/// Objective `(|w[j] - w[i]| + offset) * inv_denom[j - i]` where
/// `inv_denom[g]` is the reciprocal of a denominator that is unimodal in
/// the gap (increasing, then possibly decreasing), so its minimum over a
/// gap interval sits at one of the interval's ends.
pub struct GapObjective<'a> {
    pub inv_denom: &'a [f64],
    pub offset: f64,
}

const LEAF_LEVEL: usize = 4;

/// Largest `(|wj[k] - wi| + off) * iv[k]`, branch-free over four lanes.
#[inline(always)]
fn row_max(wi: f64, wj: &[f64], iv: &[f64], off: f64) -> f64 {
    let mut acc = [f64::NEG_INFINITY; 4];
    let (wc, wr) = (wj.chunks_exact(4), wj.len() / 4 * 4);
    for (cw, ci) in wc.zip(iv.chunks_exact(4)) {
        for l in 0..4 {
            acc[l] = fmax(acc[l], ((cw[l] - wi).abs() + off) * ci[l]);
        }
    }
    for k in wr..wj.len() {
        acc[0] = fmax(acc[0], ((wj[k] - wi).abs() + off) * iv[k]);
    }
    fmax(fmax(acc[0], acc[1]), fmax(acc[2], acc[3]))
}

/// Block maxima, minima and largest single steps for block sizes
/// `2^LEAF_LEVEL .. 2^top`; index 0 of each vector is level `LEAF_LEVEL`.
struct Pyramid {
    max: Vec<Vec<f64>>,
    min: Vec<Vec<f64>>,
    /// Largest `|w[i+1] - w[i]|` over the steps leaving the block's nodes.
    step: Vec<Vec<f64>>,
}

#[inline(always)]
fn tree_reduce16(c: &[f64], f: fn(f64, f64) -> f64) -> f64 {
    let mut a = [0.0f64; 8];
    for i in 0..8 {
        a[i] = f(c[i], c[i + 8]);
    }
    let b = [f(a[0], a[4]), f(a[1], a[5]), f(a[2], a[6]), f(a[3], a[7])];
    f(f(b[0], b[2]), f(b[1], b[3]))
}

impl Pyramid {
    fn build(w: &[f64], top: usize) -> Self {
        let leaf = 1usize << LEAF_LEVEL;
        let nb = w.len().div_ceil(leaf);
        let (mut m0, mut n0, mut s0) = (Vec::with_capacity(nb), Vec::with_capacity(nb), Vec::with_capacity(nb));
        let full = (w.len() - 1) / leaf;
        let mut d = [0.0f64; 16];
        for b in 0..full {
            // Block b plus the first node of block b + 1.
            let c = &w[b * leaf..b * leaf + leaf + 1];
            for i in 0..16 {
                d[i] = (c[i + 1] - c[i]).abs();
            }
            m0.push(tree_reduce16(&c[..16], fmax));
            n0.push(tree_reduce16(&c[..16], fmin));
            s0.push(tree_reduce16(&d, fmax));
        }
        for b in full..nb {
            let lo = b * leaf;
            let hi = (lo + leaf).min(w.len());
            let (mut mx, mut mn, mut st) = (f64::NEG_INFINITY, f64::INFINITY, 0.0f64);
            for i in lo..hi {
                mx = fmax(mx, w[i]);
                mn = fmin(mn, w[i]);
                if i + 1 < w.len() {
                    st = fmax(st, (w[i + 1] - w[i]).abs());
                }
            }
            m0.push(mx);
            n0.push(mn);
            s0.push(st);
        }
        let (mut max, mut min, mut step) = (vec![m0], vec![n0], vec![s0]);
        for l in 1..=top.saturating_sub(LEAF_LEVEL) {
            let (pm, pn, ps) = (&max[l - 1], &min[l - 1], &step[l - 1]);
            let len = pm.len().div_ceil(2);
            let mut m = Vec::with_capacity(len);
            let mut n = Vec::with_capacity(len);
            let mut s = Vec::with_capacity(len);
            for b in 0..len {
                let hi = (2 * b + 1).min(pm.len() - 1);
                m.push(fmax(pm[2 * b], pm[hi]));
                n.push(fmin(pn[2 * b], pn[hi]));
                s.push(fmax(ps[2 * b], ps[hi]));
            }
            max.push(m);
            min.push(n);
            step.push(s);
        }
        Self { max, min, step }
    }
}

/// Branch-and-bound maximiser over node pairs `(i, j)` with
/// `1 <= j - i <= q`. The block pyramid is built once and can serve
/// several objectives on the same path.
pub struct GapSearch<'w> {
    w: &'w [f64],
    q: usize,
    top: usize,
    pyr: Pyramid,
    /// Largest single step and its left node.
    best_step: (f64, usize),
}

impl<'w> GapSearch<'w> {
    pub fn new(w: &'w [f64], q: usize) -> Self {
        let n = w.len();
        let q = q.min(n.saturating_sub(1));
        // Top level: blocks at least q wide, so feasible pairs live in (a, a) or (a, a+1).
        let mut top = LEAF_LEVEL;
        while (1usize << top) < q && (1usize << top) < n {
            top += 1;
        }
        let pyr = Pyramid::build(w, top);
        let leaf = 1usize << LEAF_LEVEL;
        let steps = &pyr.step[0];
        let mut bb = 0;
        for b in 1..steps.len() {
            if steps[b] > steps[bb] {
                bb = b;
            }
        }
        let mut best_step = (f64::NEG_INFINITY, 0);
        for i in bb * leaf..((bb + 1) * leaf).min(n.saturating_sub(1)) {
            let d = (w[i + 1] - w[i]).abs();
            if d > best_step.0 {
                best_step = (d, i);
            }
        }
        Self { w, q, top, pyr, best_step }
    }

    /// Maximise `obj`; `seed` is an incumbent (for example from auxiliary
    /// candidates) and the result never falls below it. Ties keep the
    /// incumbent.
    pub fn maximize(&self, obj: &GapObjective<'_>, seed: PairMax) -> PairMax {
        let (w, q, top, pyr) = (self.w, self.q, self.top, &self.pyr);
        let n = w.len();
        let mut best = seed;
        if q == 0 {
            return best;
        }
        assert!(obj.inv_denom.len() > q, "denominator table too short");
        let inv = obj.inv_denom;
        let off = obj.offset;
        let monotone = inv[1..=q].windows(2).all(|p| p[1] <= p[0]);
        // g * inv[g] nondecreasing lets the step bound S g be used below the crossover.
        let lipschitz = monotone
            && (1..q).all(|g| (g + 1) as f64 * inv[g + 1] >= g as f64 * inv[g]);

        // Incumbent from the steepest single step: cheap and usually close to optimal.
        let (d, i) = self.best_step;
        best.offer((d + off) * inv[1], i, i + 1);

        let bound = |l: usize, a: usize, b: usize| -> Option<f64> {
            let size = 1usize << l;
            let a0 = a * size;
            let b0 = b * size;
            let b1 = ((b + 1) * size).min(n) - 1;
            let gmin = if a == b { 1 } else { b0 - (a0 + size - 1) };
            let gmax = (b1 - a0).min(q);
            if gmin > gmax {
                return None;
            }
            let pl = l - LEAF_LEVEL;
            let (mx, mn) = (&pyr.max[pl], &pyr.min[pl]);
            let range = if a == b {
                mx[a] - mn[a]
            } else {
                fmax(mx[b] - mn[a], mx[a] - mn[b])
            };
            let ub = if lipschitz && b <= a + 1 {
                // |w[j] - w[i]| <= min(range, S (j - i)) with S the largest step.
                let st = &pyr.step[pl];
                let s = if a == b { st[a] } else { fmax(st[a], st[b]) };
                let gs = if s > 0.0 { (range / s).floor().min(gmax as f64) as usize } else { gmax };
                let core = if gs < gmin {
                    range * inv[gmin]
                } else if gs >= gmax {
                    (s * gmax as f64).min(range) * inv[gmax]
                } else {
                    fmax((s * gs as f64).min(range) * inv[gs], range * inv[gs + 1])
                };
                (core + off * inv[gmin]) * (1.0 + 1e-12)
            } else if monotone && b <= a + 1 {
                let st = &pyr.step[pl];
                let s = if a == b { st[a] } else { fmax(st[a], st[b]) };
                let gstar = if s > 0.0 { (range / s).floor() as usize } else { gmax };
                let ge = gstar.clamp(gmin, gmax);
                range * inv[ge] + off * inv[gmin]
            } else {
                (range + off) * fmax(inv[gmin], inv[gmax])
            };
            Some(ub)
        };

        // Depth first, diagonal-most child first; a good incumbent appears early.
        let mut stack: Vec<(usize, usize, usize)> = Vec::with_capacity(256);
        let nblocks = pyr.max[top - LEAF_LEVEL].len();
        for a in (0..nblocks).rev() {
            if a + 1 < nblocks {
                stack.push((top, a, a + 1));
            }
            stack.push((top, a, a));
        }

        while let Some((l, a, b)) = stack.pop() {
            match bound(l, a, b) {
                Some(ub) if ub > best.value => {}
                _ => continue,
            }
            let size = 1usize << l;
            if l == LEAF_LEVEL {
                let a0 = a * size;
                let a1 = ((a + 1) * size).min(n) - 1;
                let b0 = b * size;
                let b1 = ((b + 1) * size).min(n) - 1;
                for i in a0..=a1 {
                    let jlo = (i + 1).max(b0);
                    let jhi = (i + q).min(b1);
                    if jlo > jhi {
                        continue;
                    }
                    let wj = &w[jlo..=jhi];
                    let iv = &inv[jlo - i..=jhi - i];
                    if row_max(w[i], wj, iv, off) > best.value {
                        for (k, (&x, &v)) in wj.iter().zip(iv).enumerate() {
                            best.offer(((x - w[i]).abs() + off) * v, i, jlo + k);
                        }
                    }
                }
                continue;
            }
            let cn = pyr.max[l - 1 - LEAF_LEVEL].len();
            let (x0, x1) = (2 * a, 2 * a + 1);
            let (y0, y1) = (2 * b, 2 * b + 1);
            // Pushed in reverse so the diagonal-most child is explored first.
            for (x, y) in [(x0, y1), (x1, y1), (x0, y0), (x1, y0)] {
                if x < cn && y < cn && x <= y {
                    stack.push((l - 1, x, y));
                }
            }
        }
        best
    }
}

/// One-shot [`GapSearch`].
pub fn max_gap_objective(w: &[f64], q: usize, obj: &GapObjective<'_>, seed: PairMax) -> PairMax {
    GapSearch::new(w, q).maximize(obj, seed)
}

/// Exhaustive reference for tests.
pub fn max_gap_objective_naive(w: &[f64], q: usize, obj: &GapObjective<'_>) -> PairMax {
    let mut best = PairMax::NONE;
    for i in 0..w.len() {
        for j in i + 1..w.len().min(i + q + 1) {
            best.offer(((w[j] - w[i]).abs() + obj.offset) * obj.inv_denom[j - i], i, j);
        }
    }
    best
}
