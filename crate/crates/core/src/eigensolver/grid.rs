use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Node placement: geometric from `r_min` with ratio `ratio` until the gap
/// reaches `spacing`, uniform with that gap afterwards.
///
/// Grids built from one policy for different `L` are prefixes of each other,
/// which makes truncation monotonicity hold exactly at the discrete level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    pub r_min: f64,
    pub ratio: f64,
    pub spacing: f64,
}

pub const DEFAULT_RATIO: f64 = 1.02;
pub const DEFAULT_MIN_NODES: usize = 4096;
const MIN_GRID_NODES: usize = 64;

impl GridPolicy {
    /// `r_min = ε/1000`, ratio 1.02, and a uniform gap that gives the
    /// shortest ladder length `min_nodes` nodes.
    pub fn for_ladder(epsilon: f64, shortest: f64, min_nodes: usize) -> Result<Self> {
        Self { r_min: epsilon * 1e-3, ratio: DEFAULT_RATIO, spacing: shortest / min_nodes as f64 }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return Err(invalid(format!("r_min = {} must be positive", self.r_min)));
        }
        if !(self.ratio > 1.0 && self.ratio < 2.0) {
            return Err(invalid(format!("grid ratio {} must lie in (1, 2)", self.ratio)));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(invalid(format!("grid spacing {} must be positive", self.spacing)));
        }
        Ok(self)
    }
}

/// Nodes `r₀ < r₁ < … < r_{n+1}`; the two ends carry Dirichlet conditions
/// and the `n` interior nodes are the unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(policy: &GridPolicy, length: f64) -> Result<Self> {
        let policy = policy.validated()?;
        if !(length > policy.r_min * 2.0) || !length.is_finite() {
            return Err(invalid(format!("truncation length {length} too small")));
        }
        let mut nodes = vec![policy.r_min];
        let mut r = policy.r_min;
        while r * (policy.ratio - 1.0) < policy.spacing && r < length {
            r *= policy.ratio;
            nodes.push(r);
        }
        // uniform part by multiplication, so every L sees identical nodes
        let start = r;
        let mut k = 1u64;
        while r < length {
            r = start + k as f64 * policy.spacing;
            nodes.push(r);
            k += 1;
        }
        if nodes.len() < MIN_GRID_NODES + 2 {
            return Err(crate::error::Error::GridTooCoarse { nodes: nodes.len(), required: MIN_GRID_NODES + 2 });
        }
        Ok(Self { nodes })
    }

    /// Uniform grid on `[r0, r1]` with `n` interior nodes.
    pub fn uniform(r0: f64, r1: f64, n: usize) -> Result<Self> {
        if !(r1 > r0) || n < 1 {
            return Err(invalid("empty uniform grid"));
        }
        let h = (r1 - r0) / (n + 1) as f64;
        Ok(Self { nodes: (0..n + 2).map(|i| r0 + i as f64 * h).collect() })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interior(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn len_interior(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Gap to the right of node `i`.
    pub fn gap(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// Quadrature weight of interior unknown `i` (0-based): half the two
    /// adjacent gaps.
    pub fn weight(&self, i: usize) -> f64 {
        0.5 * (self.gap(i) + self.gap(i + 1))
    }
}
