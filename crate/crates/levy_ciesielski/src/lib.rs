//! Brownian motion on `[0, 1]` from its Schauder expansion
//!
//! ```text
//! W_t = t X_0 + sum_{j >= 0} 2^{-j/2} sum_{k < 2^j} Λ_{j,k}(t) X_{j,k}
//! ```
//!
//! with `Λ_{j,k}(t) = min(2^j t - k, 1 - 2^j t + k)` on `[k 2^-j, (k+1) 2^-j)`.
//! Truncating at level `n` gives a path `W^n` that is affine on every cell of
//! width `2^-(n+1)` and equals the full series at the cell endpoints.

pub mod rng;
mod sampler;

pub use sampler::{NodeSampler, WindowSampler};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{level_stream, NormalStream, STREAM_X0};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("index k = {k} out of range for level {j} (expected k < {bound})")]
    Index { j: u32, k: u64, bound: u64 },
    #[error("time {0} outside [0, 1]")]
    Time(f64),
    #[error("cell {cell} out of range (path has {cells} cells)")]
    Cell { cell: usize, cells: usize },
    #[error("malformed coefficients: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, PathError>;

/// Largest supported truncation level. `2^(n+1) + 1` node values must fit in memory.
pub const MAX_LEVEL: u32 = 30;

/// Schauder tent `Λ_{j,k}(t)`. Zero outside `[k 2^-j, (k+1) 2^-j)`, so in
/// particular `Λ_{j,2^j-1}(1) = 0`.
pub fn schauder(j: u32, k: u64, t: f64) -> Result<f64> {
    let bound = 1u64 << j;
    if k >= bound {
        return Err(PathError::Index { j, k, bound });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(PathError::Time(t));
    }
    Ok(tent(j, k, t))
}

#[inline]
fn tent(j: u32, k: u64, t: f64) -> f64 {
    let u = t * (1u64 << j) as f64 - k as f64;
    if (0.0..1.0).contains(&u) {
        u.min(1.0 - u)
    } else {
        0.0
    }
}

/// Gaussian coefficients `X_0` and `X_{j,k}` for `j = 0..=level_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarCoefficients {
    pub x0: f64,
    pub levels: Vec<Vec<f64>>,
    pub level_n: u32,
}

impl HaarCoefficients {
    pub fn zeros(level_n: u32) -> Self {
        Self {
            x0: 0.0,
            levels: (0..=level_n).map(|j| vec![0.0; 1usize << j]).collect(),
            level_n,
        }
    }

    /// Coefficients drawn from the keyed streams of `seed`. Sampling at a
    /// higher level reproduces all lower levels exactly.
    pub fn sample(level_n: u32, seed: u64) -> Self {
        let x0 = NormalStream::new(seed, STREAM_X0).next_normal();
        let levels = (0..=level_n)
            .map(|j| {
                let mut v = vec![0.0; 1usize << j];
                NormalStream::new(seed, level_stream(j)).fill(&mut v);
                v
            })
            .collect();
        Self {
            x0,
            levels,
            level_n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.level_n > MAX_LEVEL {
            return Err(PathError::Shape(format!("level {} exceeds {MAX_LEVEL}", self.level_n)));
        }
        if self.levels.len() != self.level_n as usize + 1 {
            return Err(PathError::Shape(format!(
                "expected {} levels, found {}",
                self.level_n + 1,
                self.levels.len()
            )));
        }
        for (j, lvl) in self.levels.iter().enumerate() {
            if lvl.len() != 1usize << j {
                return Err(PathError::Shape(format!(
                    "level {j} has {} entries, expected {}",
                    lvl.len(),
                    1usize << j
                )));
            }
        }
        Ok(())
    }

    /// Append levels `level_n+1..=new_level`, each filled by `fill(j, k)`.
    pub fn extended_with(&self, new_level: u32, mut fill: impl FnMut(u32, u64) -> f64) -> Self {
        let mut out = self.clone();
        for j in self.level_n + 1..=new_level {
            out.levels.push((0..1u64 << j).map(|k| fill(j, k)).collect());
        }
        out.level_n = new_level.max(self.level_n);
        out
    }
}

/// Borrowed view of equally spaced node values `W(i * step)`, `i = 0..len`.
#[derive(Debug, Clone, Copy)]
pub struct NodeGrid<'a> {
    pub values: &'a [f64],
    pub step: f64,
}

impl<'a> NodeGrid<'a> {
    pub fn new(values: &'a [f64], step: f64) -> Self {
        Self { values, step }
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.cells() as f64
    }

    /// Linear interpolation; `t` is clamped to the grid's span.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        let x = (t / self.step).clamp(0.0, self.cells() as f64);
        let i = (x.floor() as usize).min(self.cells() - 1);
        let u = x - i as f64;
        self.values[i] + u * (self.values[i + 1] - self.values[i])
    }

    /// Largest absolute slope over all cells.
    pub fn max_slope(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
            / self.step
    }
}

/// Truncated path `W^n` with its `2^(n+1) + 1` dyadic node values.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPath {
    pub seed: Option<u64>,
    coeffs: HaarCoefficients,
    node_values: Vec<f64>,
}

/// Replay record of a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub seed: Option<u64>,
    pub level_n: u32,
    pub x0: f64,
    pub levels: Vec<Vec<f64>>,
}

impl TruncatedPath {
    pub fn new(coeffs: HaarCoefficients) -> Result<Self> {
        coeffs.validate()?;
        let node_values = node_values_from(&coeffs);
        Ok(Self {
            seed: None,
            coeffs,
            node_values,
        })
    }

    pub fn sample(level_n: u32, seed: u64) -> Self {
        let mut p = Self::new(HaarCoefficients::sample(level_n, seed)).expect("sampled shape is valid");
        p.seed = Some(seed);
        p
    }

    pub fn zero(level_n: u32) -> Self {
        Self::new(HaarCoefficients::zeros(level_n)).expect("zero shape is valid")
    }

    pub fn coeffs(&self) -> &HaarCoefficients {
        &self.coeffs
    }

    pub fn level_n(&self) -> u32 {
        self.coeffs.level_n
    }

    /// Width of the affine cells, `2^-(n+1)`.
    pub fn cell_width(&self) -> f64 {
        (-(self.level_n() as f64 + 1.0)).exp2()
    }

    pub fn cells(&self) -> usize {
        self.node_values.len() - 1
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    pub fn grid(&self) -> NodeGrid<'_> {
        NodeGrid::new(&self.node_values, self.cell_width())
    }

    /// `W^n_t` by direct summation of the Schauder series, `O(n)`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(PathError::Time(t));
        }
        Ok(evaluate_series(&self.coeffs, t))
    }

    /// `(slope, intercept)` of `W^n` on cell `k`, so that
    /// `W^n_t = slope * t + intercept` on `[k 2^-(n+1), (k+1) 2^-(n+1)]`.
    pub fn cell_affine(&self, cell: usize) -> Result<(f64, f64)> {
        if cell >= self.cells() {
            return Err(PathError::Cell {
                cell,
                cells: self.cells(),
            });
        }
        let w = self.cell_width();
        let slope = (self.node_values[cell + 1] - self.node_values[cell]) * self.cells() as f64;
        let intercept = self.node_values[cell] - slope * (cell as f64 * w);
        Ok((slope, intercept))
    }

    pub fn to_record(&self) -> PathRecord {
        PathRecord {
            seed: self.seed,
            level_n: self.coeffs.level_n,
            x0: self.coeffs.x0,
            levels: self.coeffs.levels.clone(),
        }
    }

    pub fn from_record(rec: PathRecord) -> Result<Self> {
        let mut p = Self::new(HaarCoefficients {
            x0: rec.x0,
            levels: rec.levels,
            level_n: rec.level_n,
        })?;
        p.seed = rec.seed;
        Ok(p)
    }
}

/// Direct Schauder sum, independent of the node table.
pub fn evaluate_series(c: &HaarCoefficients, t: f64) -> f64 {
    let mut acc = t * c.x0;
    for (j, lvl) in c.levels.iter().enumerate() {
        let scale = (1u64 << j) as f64;
        let k = (t * scale).floor();
        if k < 0.0 || k >= scale {
            continue;
        }
        let lam = tent(j as u32, k as u64, t);
        if lam != 0.0 {
            acc += (-(j as f64) / 2.0).exp2() * lam * lvl[k as usize];
        }
    }
    acc
}

/// Node values by midpoint displacement: at level `j` the midpoint of each
/// level-`j` cell moves by `2^(-j/2) X_{j,k} / 2` off the chord.
fn node_values_from(c: &HaarCoefficients) -> Vec<f64> {
    let n = c.level_n;
    let m = 1usize << (n + 1);
    let mut w = vec![0.0; m + 1];
    w[m] = c.x0;
    for (j, lvl) in c.levels.iter().enumerate() {
        displace_level(&mut w, j as u32, n, lvl);
    }
    w
}

#[inline]
pub(crate) fn displace_level(w: &mut [f64], j: u32, n: u32, coeffs: &[f64]) {
    let stride = 1usize << (n + 1 - j);
    let half = stride / 2;
    let amp = 0.5 * (-(j as f64) / 2.0).exp2();
    for (k, x) in coeffs.iter().enumerate() {
        let a = k * stride;
        w[a + half] = 0.5 * (w[a] + w[a + stride]) + amp * x;
    }
}
