use super::grid::Grid;
use crate::error::{invalid, Error, Result};
use crate::reduction::ReducedOperator;

/// Relative bisection tolerance on eigenvalues.
pub const EIGEN_TOL: f64 = 1e-12;
const PIVOT_FLOOR: f64 = 1e-300;
const MAX_BISECTIONS: usize = 400;

/// Symmetric 2×2 block `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Structure {
    /// Diagonal `diag`, sub/super-diagonal `off`.
    Tridiagonal { diag: Vec<f64> },
    /// Diagonal 2×2 blocks; the off-diagonal blocks are `off[i]·I`.
    Blocks { diag: Vec<Block> },
}

/// Three-point discretization of `−u'' + V u` with Dirichlet ends,
/// symmetrized by the square roots of the nodal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    grid: Grid,
    structure: Structure,
    /// Coupling between interior nodes `i` and `i + 1`.
    off: Vec<f64>,
}

fn kinetic(grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let n = grid.len_interior();
    let diag = (0..n).map(|i| (1.0 / grid.gap(i) + 1.0 / grid.gap(i + 1)) / grid.weight(i)).collect();
    let off = (0..n.saturating_sub(1))
        .map(|i| -1.0 / (grid.gap(i + 1) * (grid.weight(i) * grid.weight(i + 1)).sqrt()))
        .collect();
    (diag, off)
}

fn checked(v: f64, r: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinitePotential { r })
    }
}

impl DiscretizedOperator {
    pub fn scalar<F: Fn(f64) -> Result<f64>>(grid: Grid, potential: F) -> Result<Self> {
        let (mut diag, off) = kinetic(&grid);
        for (d, &r) in diag.iter_mut().zip(grid.interior()) {
            *d += checked(potential(r)?, r)?;
        }
        Ok(Self { grid, structure: Structure::Tridiagonal { diag }, off })
    }

    /// `matrix(r)` returns `[V₁, V₃, V₂]` at `r`.
    pub fn coupled<F: Fn(f64) -> Result<[f64; 3]>>(grid: Grid, matrix: F) -> Result<Self> {
        let (k, off) = kinetic(&grid);
        let mut diag = Vec::with_capacity(k.len());
        for (&ki, &r) in k.iter().zip(grid.interior()) {
            let [v1, v3, v2] = matrix(r)?;
            diag.push(Block { a: ki + checked(v1, r)?, b: checked(v3, r)?, c: ki + checked(v2, r)? });
        }
        Ok(Self { grid, structure: Structure::Blocks { diag }, off })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_coupled(&self) -> bool {
        matches!(self.structure, Structure::Blocks { .. })
    }

    /// Matrix order.
    pub fn order(&self) -> usize {
        match &self.structure {
            Structure::Tridiagonal { diag } => diag.len(),
            Structure::Blocks { diag } => 2 * diag.len(),
        }
    }

    /// `A + cI`.
    pub fn shifted(&self, c: f64) -> Self {
        let structure = match &self.structure {
            Structure::Tridiagonal { diag } => Structure::Tridiagonal { diag: diag.iter().map(|d| d + c).collect() },
            Structure::Blocks { diag } => Structure::Blocks {
                diag: diag.iter().map(|b| Block { a: b.a + c, b: b.b, c: b.c + c }).collect(),
            },
        };
        Self { grid: self.grid.clone(), structure, off: self.off.clone() }
    }

    /// Entry `(i, j)` in the interleaved ordering (component fastest).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (i.min(j), i.max(j));
        match &self.structure {
            Structure::Tridiagonal { diag } => match hi - lo {
                0 => diag[lo],
                1 => self.off[lo],
                _ => 0.0,
            },
            Structure::Blocks { diag } => {
                let (ni, nj) = (lo / 2, hi / 2);
                if ni == nj {
                    let b = diag[ni];
                    match (lo % 2, hi % 2) {
                        (0, 0) => b.a,
                        (1, 1) => b.c,
                        _ => b.b,
                    }
                } else if nj == ni + 1 && lo % 2 == hi % 2 {
                    self.off[ni]
                } else {
                    0.0
                }
            }
        }
    }

    /// Half-bandwidth in the interleaved ordering.
    fn bandwidth(&self) -> usize {
        if self.is_coupled() {
            2
        } else {
            1
        }
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.order();
        let w = self.bandwidth();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let radius: f64 = (i.saturating_sub(w)..(i + w + 1).min(n))
                .filter(|&j| j != i)
                .map(|j| self.entry(i, j).abs())
                .sum();
            let d = self.entry(i, i);
            lo = lo.min(d - radius);
            hi = hi.max(d + radius);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of `A − xI`).
    pub fn count_below(&self, x: f64) -> usize {
        match &self.structure {
            Structure::Tridiagonal { diag } => {
                let mut count = 0;
                let mut d = 1.0;
                for (i, &a) in diag.iter().enumerate() {
                    let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / d };
                    d = a - x - coupling;
                    if d.abs() < PIVOT_FLOOR {
                        d = -PIVOT_FLOOR;
                    }
                    if d < 0.0 {
                        count += 1;
                    }
                }
                count
            }
            Structure::Blocks { diag } => {
                let mut count = 0;
                let mut prev_inv = Block { a: 0.0, b: 0.0, c: 0.0 };
                for (i, blk) in diag.iter().enumerate() {
                    let k2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
                    let d = Block {
                        a: blk.a - x - k2 * prev_inv.a,
                        b: blk.b - k2 * prev_inv.b,
                        c: blk.c - x - k2 * prev_inv.c,
                    };
                    let mut det = d.a * d.c - d.b * d.b;
                    if det.abs() < PIVOT_FLOOR {
                        det = -PIVOT_FLOOR;
                    }
                    count += if det < 0.0 {
                        1
                    } else if d.a + d.c < 0.0 {
                        2
                    } else {
                        0
                    };
                    prev_inv = Block { a: d.c / det, b: -d.b / det, c: d.a / det };
                }
                count
            }
        }
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection inside
    /// `[lo, hi]`, which must bracket it.
    fn bisect(&self, index: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= EIGEN_TOL * lo.abs().max(hi.abs()).max(1e-3) || mid == lo || mid == hi {
                return Ok(mid);
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::NonConvergence { residual: hi - lo })
    }

    /// All eigenvalues below `cutoff`, ascending.
    pub fn eigenvalues_below(&self, cutoff: f64) -> Result<Vec<f64>> {
        let (lo, hi) = self.gershgorin();
        let count = self.count_below(cutoff);
        let top = cutoff.min(hi);
        (0..count).map(|i| self.bisect(i, lo, top)).collect()
    }

    /// The `k` smallest eigenvalues, ascending.
    pub fn lowest(&self, k: usize) -> Result<Vec<f64>> {
        let k = k.min(self.order());
        if k == 0 {
            return Ok(Vec::new());
        }
        let (lo, hi) = self.gershgorin();
        // grow the bracket from below; the Gershgorin top can be astronomically large
        let mut top = lo + 1.0;
        while self.count_below(top) < k && top < hi {
            top = (lo + 2.0 * (top - lo)).min(hi);
        }
        let top = top.max(lo + 1.0);
        let top = if self.count_below(top) < k { hi + 1.0 } else { top };
        (0..k).map(|i| self.bisect(i, lo, top)).collect()
    }

    /// Normalized eigenvector for the eigenvalue `lambda`, by inverse
    /// iteration. Interleaved `(u₁, u₂)` per node in the coupled case.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.order();
        let shift = lambda + 1e-10 * lambda.abs().max(1.0);
        let lu = BandLu::factor(self, shift)?;
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7).sin()).collect();
        normalize(&mut x);
        let mut change = f64::INFINITY;
        for _ in 0..8 {
            let mut y = lu.solve(&x);
            normalize(&mut y);
            // the sign of an eigenvector is arbitrary
            let dot: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
            let sign = dot.signum();
            change = y.iter().zip(&x).map(|(a, b)| (a - sign * b).abs()).fold(0.0, f64::max);
            x = y;
            if change <= 1e-10 {
                return Ok(x);
            }
        }
        Err(Error::NonConvergence { residual: change })
    }

    /// Fraction of the squared norm of `vector` at nodes with `r > r0`.
    pub fn mass_beyond(&self, vector: &[f64], r0: f64) -> f64 {
        let comps = if self.is_coupled() { 2 } else { 1 };
        let total: f64 = vector.iter().map(|v| v * v).sum();
        let outer: f64 = self
            .grid
            .interior()
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > r0)
            .map(|(i, _)| (0..comps).map(|c| vector[comps * i + c].powi(2)).sum::<f64>())
            .sum();
        if total > 0.0 {
            outer / total
        } else {
            0.0
        }
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

/// LU with partial pivoting of the banded `A − σI`.
struct BandLu {
    n: usize,
    kl: usize,
    /// Upper bandwidth after fill-in.
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn factor(op: &DiscretizedOperator, sigma: f64) -> Result<Self> {
        let n = op.order();
        if n == 0 {
            return Err(invalid("empty matrix"));
        }
        let kl = op.bandwidth();
        let ku = 2 * kl;
        let width = kl + ku + 1;
        let mut lu = Self { n, kl, ku, width, data: vec![0.0; n * width], pivots: vec![0; n] };
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + kl + 1).min(n) {
                let v = op.entry(i, j) - if i == j { sigma } else { 0.0 };
                let k = lu.idx(i, j);
                lu.data[k] = v;
            }
        }
        let floor = 1e-3 * f64::EPSILON * sigma.abs().max(1.0);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let p = (k..=last_row)
                .max_by(|&a, &b| lu.data[lu.idx(a, k)].abs().total_cmp(&lu.data[lu.idx(b, k)].abs()))
                .unwrap();
            lu.pivots[k] = p;
            let last_col = (k + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (lu.idx(k, j), lu.idx(p, j));
                    lu.data.swap(a, b);
                }
            }
            let kk = lu.idx(k, k);
            if lu.data[kk].abs() < floor {
                lu.data[kk] = floor;
            }
            let pivot = lu.data[kk];
            for i in k + 1..=last_row {
                let ik = lu.idx(i, k);
                let l = lu.data[ik] / pivot;
                lu.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let (a, b) = (lu.idx(i, j), lu.idx(k, j));
                        lu.data[a] -= l * lu.data[b];
                    }
                }
            }
        }
        Ok(lu)
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = rhs.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            for i in k + 1..=(k + self.kl).min(n - 1) {
                x[i] -= self.data[self.idx(i, k)] * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + self.ku).min(n - 1) {
                s -= self.data[self.idx(k, j)] * x[j];
            }
            x[k] = s / self.data[self.idx(k, k)];
        }
        x
    }
}

/// Assembles the matrix of a reduced operator on `grid`.
pub fn discretize(op: &ReducedOperator, grid: Grid) -> Result<DiscretizedOperator> {
    match op {
        ReducedOperator::Scalar(s) => DiscretizedOperator::scalar(grid, |r| s.potential(r)),
        ReducedOperator::Coupled(c) => DiscretizedOperator::coupled(grid, |r| {
            let m = c.matrix(r)?;
            Ok([m[0][0], m[0][1], m[1][1]])
        }),
    }
}
