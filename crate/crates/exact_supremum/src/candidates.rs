//! Extreme-point candidates for the band supremum of a piecewise-affine path.
//!
//! For cells `I_k = [k h, (k+1) h]` the pair `(I_k, I_{k+l})`, `l >= 1`, meets
//! the band `0 < s - t <= δ` in a convex polygon: the full rectangle when
//! `(l+1) h <= δ`, a pentagon when `l h <= δ < (l+1) h` and a triangle when
//! `(l-1) h <= δ < l h`. The numerator is affine there, so its extrema over
//! the polygon are among the vertices. For `l = 0` the numerator is
//! `|slope| (s - t)` and both admissible denominators make the ratio
//! increasing in the gap, so the maximising gap is `min(δ, h)`.

/// Shape of the feasible part of a cell pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Rectangle,
    Pentagon,
    Triangle,
    Quadrilateral,
    Degenerate,
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellPolygon {
    pub k: usize,
    pub l: usize,
    pub shape: Shape,
    /// Vertices in generation order: rectangle corners first, then the
    /// intersections of `s = t + δ` with the edges `t = kh`, `t = (k+1)h`,
    /// `s = (k+l)h`, `s = (k+l+1)h`.
    pub vertices: Vec<(f64, f64)>,
}

fn push_unique(v: &mut Vec<(f64, f64)>, p: (f64, f64), tol: f64) {
    if !v.iter().any(|q| (q.0 - p.0).abs() <= tol && (q.1 - p.1).abs() <= tol) {
        v.push(p);
    }
}

/// Feasible polygon of the cell pair `(k, k + l)` with `l >= 1`.
pub fn cell_pair_polygon(k: usize, l: usize, h: f64, delta: f64) -> CellPolygon {
    assert!(l >= 1, "l = 0 pairs are handled by `same_cell_candidates`");
    let tol = h * 1e-9;
    let (t0, t1) = (k as f64 * h, (k + 1) as f64 * h);
    let (s0, s1) = ((k + l) as f64 * h, (k + l + 1) as f64 * h);
    let feasible = |t: f64, s: f64| s - t <= delta + tol;
    let mut vertices = Vec::with_capacity(5);
    for (t, s) in [(t0, s0), (t0, s1), (t1, s0), (t1, s1)] {
        if feasible(t, s) {
            push_unique(&mut vertices, (t, s), tol);
        }
    }
    let within = |x: f64, lo: f64, hi: f64| x >= lo - tol && x <= hi + tol;
    for (t, s) in [(t0, t0 + delta), (t1, t1 + delta), (s0 - delta, s0), (s1 - delta, s1)] {
        if within(t, t0, t1) && within(s, s0, s1) {
            push_unique(&mut vertices, (t.clamp(t0, t1), s.clamp(s0, s1)), tol);
        }
    }
    let shape = match vertices.len() {
        0 => Shape::Empty,
        1 | 2 => Shape::Degenerate,
        3 => Shape::Triangle,
        4 => {
            if vertices.iter().all(|&(t, s)| (t == t0 || t == t1) && (s == s0 || s == s1)) {
                Shape::Rectangle
            } else {
                Shape::Quadrilateral
            }
        }
        _ => Shape::Pentagon,
    };
    CellPolygon { k, l, shape, vertices }
}

/// The two maximal-gap points inside cell `k`.
pub fn same_cell_candidates(k: usize, h: f64, delta: f64) -> [(f64, f64); 2] {
    let gamma = delta.min(h);
    let (t0, t1) = (k as f64 * h, (k + 1) as f64 * h);
    [(t0, t0 + gamma), (t1 - gamma, t1)]
}

/// A candidate point tagged with its cell pair and position in the scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub t: f64,
    pub s: f64,
    pub k: usize,
    pub l: usize,
    pub vertex: usize,
}

/// All candidates in `(k, l, vertex)` order for a grid of `cells` cells.
/// Vertices with zero gap are dropped (the ratio vanishes there).
pub fn enumerate(cells: usize, h: f64, delta: f64) -> Vec<Candidate> {
    let lmax = (delta / h).floor() as usize + 1;
    let mut out = Vec::new();
    for k in 0..cells {
        for (v, (t, s)) in same_cell_candidates(k, h, delta).into_iter().enumerate() {
            out.push(Candidate { t, s, k, l: 0, vertex: v });
        }
        for l in 1..=lmax {
            if k + l >= cells {
                break;
            }
            let poly = cell_pair_polygon(k, l, h, delta);
            for (v, &(t, s)) in poly.vertices.iter().enumerate() {
                if s > t {
                    out.push(Candidate { t, s, k, l, vertex: v });
                }
            }
        }
    }
    out
}
