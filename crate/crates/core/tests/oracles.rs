//! Independent dense checks with nalgebra.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use warpspec::eigensolver::{discretize, DiscretizedOperator, Grid, GridPolicy};
use warpspec::reduction::{assemble_type3, to_arclength, PotentialKind, ReducedOperator};
use warpspec::sphere_modes::coclosed_eigenvalues;
use warpspec::{arclength, build_profile, ArclengthMap, WarpParams};

/// Laplace-Beltrami on S² with a cell-centred latitude-longitude grid.
/// Fluxes vanish at the poles, so no pole rows are needed. Returns the
/// sorted spectrum of `−Δ`.
fn sphere_laplacian(n_theta: usize, n_phi: usize) -> Vec<f64> {
    let ht = std::f64::consts::PI / n_theta as f64;
    let hp = 2.0 * std::f64::consts::PI / n_phi as f64;
    let n = n_theta * n_phi;
    let idx = |i: usize, j: usize| i * n_phi + (j % n_phi);
    let theta = |i: usize| (i as f64 + 0.5) * ht;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n_theta {
        let s = theta(i).sin();
        let (up, down) = ((theta(i) + 0.5 * ht).sin(), (theta(i) - 0.5 * ht).sin());
        for j in 0..n_phi {
            let k = idx(i, j);
            // symmetric form: weight sinθ_i moved into the matrix
            let w_up = if i + 1 < n_theta { up / (ht * ht) } else { 0.0 };
            let w_down = if i > 0 { down / (ht * ht) } else { 0.0 };
            let w_phi = 1.0 / (s * hp * hp);
            a[(k, k)] += w_up + w_down + 2.0 * w_phi;
            if i + 1 < n_theta {
                a[(k, idx(i + 1, j))] -= w_up;
            }
            if i > 0 {
                a[(k, idx(i - 1, j))] -= w_down;
            }
            a[(k, idx(i, j + 1))] -= w_phi;
            a[(k, idx(i, j + n_phi - 1))] -= w_phi;
        }
    }
    // M^{-1/2} A M^{-1/2} with M = diag(sinθ_i)
    for r in 0..n {
        for c in 0..n {
            let (sr, sc) = (theta(r / n_phi).sin(), theta(c / n_phi).sin());
            a[(r, c)] /= (sr * sc).sqrt();
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn round_sphere_scalar_spectrum() {
    let ev = sphere_laplacian(24, 48);
    let tower: Vec<f64> = coclosed_eigenvalues(3, 0, 2).unwrap().iter().map(|m| m.lambda).collect();
    assert_eq!(tower, vec![0.0, 2.0, 6.0]);
    assert!(ev[0].abs() < 1e-9, "{}", ev[0]);
    // multiplicities 2k + 1
    for (lambda, range) in [(2.0, 1..4), (6.0, 4..9)] {
        for &e in &ev[range] {
            assert!((e - lambda).abs() / lambda < 0.02, "{e} vs {lambda}");
        }
    }
    assert!(ev[9] > 6.0 * 1.5);
}

fn map(dim: usize, a: f64, b: f64) -> Arc<ArclengthMap> {
    Arc::new(arclength(&build_profile(WarpParams::new(dim, a, b, 1.0, 2.0).unwrap()).unwrap()).unwrap())
}

fn small_grid(length: f64) -> Grid {
    Grid::new(&GridPolicy { r_min: 1e-3, ratio: 1.05, spacing: 0.05 }, length).unwrap()
}

fn dense(m: &DiscretizedOperator) -> Vec<f64> {
    let n = m.order();
    let a = DMatrix::from_fn(n, n, |i, j| m.entry(i, j));
    for i in 0..n {
        for j in 0..n {
            assert_eq!(a[(i, j)], a[(j, i)], "asymmetric at ({i}, {j})");
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn compare(op: &ReducedOperator, length: f64) {
    let m = discretize(op, small_grid(length)).unwrap();
    let want = dense(&m);
    let got = m.lowest(6).unwrap();
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0), "{g} vs {w}");
    }
    let cut = 0.5 * (want[3] + want[4]);
    assert_eq!(m.count_below(cut), 4);
    let below = m.eigenvalues_below(cut).unwrap();
    assert_eq!(below.len(), 4);
}

#[test]
fn scalar_matrix_matches_dense_solver() {
    compare(&to_arclength(map(3, -1.0, -1.0), PotentialKind::TypeI, 0, 2.0).unwrap(), 8.0);
    compare(&to_arclength(map(5, -2.0, 0.5), PotentialKind::TypeII, 2, 6.0).unwrap(), 6.0);
}

#[test]
fn coupled_matrix_matches_dense_solver() {
    let op = ReducedOperator::Coupled(assemble_type3(map(4, -1.0, -0.5), 2, 6.0).unwrap());
    compare(&op, 6.0);
    let op = ReducedOperator::Coupled(assemble_type3(map(5, -1.5, 1.0), 1, 4.0).unwrap());
    compare(&op, 5.0);
}

#[test]
fn eigenvectors_match_dense_solver() {
    let op = to_arclength(map(4, -1.0, 1.0), PotentialKind::TypeI, 1, 3.0).unwrap();
    let m = discretize(&op, small_grid(6.0)).unwrap();
    let n = m.order();
    let a = DMatrix::from_fn(n, n, |i, j| m.entry(i, j));
    let lowest = m.lowest(1).unwrap()[0];
    let v = m.eigenvector(lowest).unwrap();
    let av = &a * nalgebra::DVector::from_column_slice(&v);
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let residual: f64 = av.iter().zip(&v).map(|(x, y)| (x - lowest * y).powi(2)).sum::<f64>().sqrt();
    assert!(residual / norm < 1e-7 * lowest.abs().max(1.0), "residual {residual}");
}

#[test]
fn halving_r_min_barely_moves_eigenvalues() {
    // C = 2·1 + 4 > 3/4: limit point at the origin
    let op = to_arclength(map(5, -1.0, 1.0), PotentialKind::TypeI, 0, 4.0).unwrap();
    let spectrum = |r_min: f64| {
        let grid = Grid::new(&GridPolicy { r_min, ratio: 1.02, spacing: 40.0 / 4096.0 }, 40.0).unwrap();
        discretize(&op, grid).unwrap().lowest(4).unwrap()
    };
    let (coarse, fine) = (spectrum(1e-3), spectrum(5e-4));
    for (x, y) in coarse.iter().zip(&fine) {
        assert!((x - y).abs() / y.abs() < 1e-3, "{x} vs {y}");
    }
}
