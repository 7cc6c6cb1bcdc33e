//! Eigenvalues of the Hodge Laplacian on the round sphere `S^{N−1}`.
//!
//! On `S^n` (`n = N − 1`) the coclosed `p`-eigenforms have eigenvalues
//! `(k + p)(k + n − 1 − p)` for `k ≥ 1`, plus the harmonic forms: the
//! constants (`p = 0`, where the formula extends to `k = 0`) and the volume
//! form (`p = n`, whose coclosed part is harmonic only). Closed forms are
//! the Hodge duals of coclosed ones, and the full `p`-form spectrum is the
//! union of the coclosed `p` tower with the nonzero closed `p` tower.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereMode {
    pub p: usize,
    pub k: usize,
    pub lambda: f64,
}

fn check_degree(dim: usize, p: usize) -> Result<()> {
    if dim < 2 {
        return Err(invalid(format!("dimension N = {dim} must be at least 2")));
    }
    if p > dim - 1 {
        return Err(invalid(format!("form degree p = {p} exceeds sphere dimension {}", dim - 1)));
    }
    Ok(())
}

/// Coclosed `p`-form eigenvalues on `S^{N−1}` with mode index up to `k_max`,
/// sorted ascending.
///
/// `p = 0` yields `k(k + N − 2)` for `k = 0..=k_max`; `1 ≤ p ≤ N − 2` yields
/// `(k + p)(k + N − 2 − p)` for `k = 1..=k_max`; `p = N − 1` yields only the
/// harmonic volume form at `k = 0`.
pub fn coclosed_eigenvalues(dim: usize, p: usize, k_max: usize) -> Result<Vec<SphereMode>> {
    check_degree(dim, p)?;
    let n = dim as f64;
    let modes = if p == 0 {
        (0..=k_max)
            .map(|k| SphereMode { p, k, lambda: (k as f64) * (k as f64 + n - 2.0) })
            .collect()
    } else if p == dim - 1 {
        vec![SphereMode { p, k: 0, lambda: 0.0 }]
    } else {
        let q = p as f64;
        (1..=k_max)
            .map(|k| {
                let k = k as f64;
                SphereMode { p, k: k as usize, lambda: (k + q) * (k + n - 2.0 - q) }
            })
            .collect()
    };
    Ok(modes)
}

/// Closed `p`-form eigenvalues on `S^{N−1}`: the image of the coclosed
/// `(N − 1 − p)` tower under the Hodge star.
pub fn closed_eigenvalues(dim: usize, p: usize, k_max: usize) -> Result<Vec<SphereMode>> {
    check_degree(dim, p)?;
    Ok(coclosed_eigenvalues(dim, dim - 1 - p, k_max)?
        .into_iter()
        .map(|m| SphereMode { p, ..m })
        .collect())
}

/// Smallest eigenvalue of the full Hodge Laplacian on `p`-forms of
/// `S^{N−1}`: the minimum of the coclosed `p` tower and the nonzero closed
/// `p` tower.
pub fn lowest_eigenvalue(dim: usize, p: usize) -> Result<f64> {
    check_degree(dim, p)?;
    let coclosed = coclosed_eigenvalues(dim, p, 1)?;
    let closed = closed_eigenvalues(dim, p, 1)?;
    Ok(coclosed
        .iter()
        .chain(closed.iter().filter(|m| m.lambda > 0.0))
        .map(|m| m.lambda)
        .fold(f64::INFINITY, f64::min))
}
