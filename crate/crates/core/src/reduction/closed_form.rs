//! Closed forms of the reduced potentials in the two pure regions of the
//! arclength coordinate: `r < ε` (Euclidean) and `r > c̄` (asymptotic).

use super::operator::{PotentialSpec, Regime};
use super::PotentialKind;

/// `N − 2p − 1` for type I. Type II at `p` is type I at `N − p`, so it gets
/// `−(N − 2p + 1)`.
fn shift(spec: &PotentialSpec) -> f64 {
    let base = spec.dim as f64 - 2.0 * spec.p as f64;
    match spec.kind {
        PotentialKind::TypeII => -(base + 1.0),
        _ => base - 1.0,
    }
}

/// Closed-form `V₁` (type I, and the first diagonal entry of type III) or
/// `V₂` (type II) at `r`. `None` on the bridge `[ε, c̄]`.
///
/// For `a < −1` the type II constant is
/// `((N−2p+1)/2)² b²/|a+1|² − ((N−2p+1)/2) b/|a+1|`.
pub fn closed_form_potential(spec: &PotentialSpec, r: f64) -> Option<f64> {
    let m = shift(spec);
    let lambda = spec.lambda;
    if r < spec.epsilon {
        return Some(((m / 2.0) * ((m - 2.0) / 2.0) + lambda) / (r * r));
    }
    if r <= spec.c_bar {
        return None;
    }
    let b = spec.b;
    match spec.regime {
        Regime::Hyperbolic => Some((m / 2.0).powi(2) * b * b + lambda * (2.0 * b * r).exp()),
        Regime::Steep { alpha, c1 } => {
            let k_tilde = (m / 2.0).powi(2) * b * b / (alpha * alpha) + (m / 2.0) * b / alpha;
            let s = r - c1;
            let e = 2.0 * b / alpha;
            Some(k_tilde / (s * s) + lambda * alpha.powf(e) * s.powf(e))
        }
    }
}

/// Closed-form off-diagonal weight `V₃` (without the `√λ` factor).
///
/// For `a < −1` this carries the prefactor `−2b/|a+1|` that comes from
/// differentiating `g̃(r) = (|a+1|(r − c₁))^{−2b/|a+1|}`.
pub fn closed_form_coupling(spec: &PotentialSpec, r: f64) -> Option<f64> {
    if r < spec.epsilon {
        return Some(2.0 / (r * r));
    }
    if r <= spec.c_bar {
        return None;
    }
    let b = spec.b;
    match spec.regime {
        Regime::Hyperbolic => Some(-2.0 * b * (b * r).exp()),
        Regime::Steep { alpha, c1 } => {
            let e = b / alpha;
            Some(-2.0 * e * alpha.powf(e) * (r - c1).powf(e - 1.0))
        }
    }
}
