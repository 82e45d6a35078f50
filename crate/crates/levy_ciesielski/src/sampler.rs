//! Allocation-free samplers for Monte Carlo loops. They write node values
//! straight from the keyed streams and agree bit-for-bit with
//! [`TruncatedPath::sample`](crate::TruncatedPath::sample).

use crate::rng::{level_stream, NormalStream, STREAM_X0};
use crate::NodeGrid;

/// Reusable buffer holding the `2^(n+1) + 1` node values of `W^n` on `[0, 1]`.
pub struct NodeSampler {
    level_n: u32,
    nodes: Vec<f64>,
}

impl NodeSampler {
    pub fn new(level_n: u32) -> Self {
        Self {
            level_n,
            nodes: vec![0.0; (1usize << (level_n + 1)) + 1],
        }
    }

    pub fn level_n(&self) -> u32 {
        self.level_n
    }

    pub fn resample(&mut self, seed: u64) -> NodeGrid<'_> {
        let n = self.level_n;
        let m = 1usize << (n + 1);
        let w = &mut self.nodes;
        w[0] = 0.0;
        w[m] = NormalStream::new(seed, STREAM_X0).next_normal();
        for j in 0..=n {
            let mut stream = NormalStream::new(seed, level_stream(j));
            let stride = 1usize << (n + 1 - j);
            let half = stride / 2;
            let amp = 0.5 * (-(j as f64) / 2.0).exp2();
            let mut a = 0;
            while a < m {
                w[a + half] = 0.5 * (w[a] + w[a + stride]) + amp * stream.next_normal();
                a += stride;
            }
        }
        self.grid()
    }

    pub fn zero(&mut self) -> NodeGrid<'_> {
        self.nodes.fill(0.0);
        self.grid()
    }

    pub fn grid(&self) -> NodeGrid<'_> {
        NodeGrid::new(&self.nodes, (-(self.level_n as f64 + 1.0)).exp2())
    }
}

/// Node values of `W^n` restricted to the window `[0, 2^-p]`.
///
/// Levels `j < p` are affine on the window and only enter through the right
/// endpoint, `W(2^-p) = 2^-p (X_0 + sum_{j<p} 2^(j/2) X_{j,0})`. Level `j >= p`
/// contributes its first `2^(j-p)` coefficients, which are prefixes of the
/// level streams, so the window agrees exactly with the full path.
pub struct WindowSampler {
    level_n: u32,
    p: u32,
    nodes: Vec<f64>,
}

impl WindowSampler {
    /// Requires `p <= level_n + 1`.
    pub fn new(level_n: u32, p: u32) -> Self {
        assert!(p <= level_n + 1, "window 2^-{p} is narrower than one cell at level {level_n}");
        Self {
            level_n,
            p,
            nodes: vec![0.0; (1usize << (level_n + 1 - p)) + 1],
        }
    }

    pub fn window(&self) -> f64 {
        (-(self.p as f64)).exp2()
    }

    pub fn resample(&mut self, seed: u64) -> NodeGrid<'_> {
        let (n, p) = (self.level_n, self.p);
        let m = self.nodes.len() - 1;
        let w = &mut self.nodes;
        let mut right = NormalStream::new(seed, STREAM_X0).next_normal();
        for j in 0..p.min(n + 1) {
            right += (j as f64 / 2.0).exp2() * NormalStream::new(seed, level_stream(j)).next_normal();
        }
        w[0] = 0.0;
        w[m] = right * (-(p as f64)).exp2();
        for j in p..=n {
            let mut stream = NormalStream::new(seed, level_stream(j));
            let stride = 1usize << (n + 1 - j);
            let half = stride / 2;
            let amp = 0.5 * (-(j as f64) / 2.0).exp2();
            let mut a = 0;
            while a < m {
                w[a + half] = 0.5 * (w[a] + w[a + stride]) + amp * stream.next_normal();
                a += stride;
            }
        }
        self.grid()
    }

    pub fn zero(&mut self) -> NodeGrid<'_> {
        self.nodes.fill(0.0);
        self.grid()
    }

    pub fn grid(&self) -> NodeGrid<'_> {
        NodeGrid::new(&self.nodes, (-(self.level_n as f64 + 1.0)).exp2())
    }
}
