//! Warped-product metrics `ds² = f(t) dt² + g(t) dθ²` on the unit ball.
//!
//! The metric is Euclidean in polar form near the origin (`f ≡ 1`, `g = t²`
//! on `(0, ε)`) and exponential near the boundary sphere
//! (`f = e^{-2(a+1)t}`, `g = e^{-2bt}` on `(c, ∞)`). On `[ε, c]` both
//! `ln f` and `ln g` are quintic Hermite interpolants, so `f` and `g` stay
//! positive and are `C²` across both junctions.
//!
//! Everything downstream works with logarithmic jets (`ln f`, `(ln f)'`,
//! `(ln f)''` and the same for `g`) rather than raw values, which keeps the
//! reduced potentials finite far out where `f` or `g` overflow.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpParams {
    /// Dimension `N` of the ball.
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    /// End of the Euclidean region.
    pub epsilon: f64,
    /// Start of the asymptotic region.
    pub c: f64,
}

impl WarpParams {
    pub fn new(dim: usize, a: f64, b: f64, epsilon: f64, c: f64) -> Result<Self> {
        let params = Self { dim, a, b, epsilon, c };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(invalid(format!("dimension N = {} must be at least 2", self.dim)));
        }
        if !(self.a.is_finite() && self.b.is_finite() && self.epsilon.is_finite() && self.c.is_finite()) {
            return Err(invalid("metric parameters must be finite"));
        }
        if self.a > -1.0 {
            return Err(invalid(format!("a = {} gives an incomplete metric (need a <= -1)", self.a)));
        }
        if self.epsilon <= 0.0 {
            return Err(invalid(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if self.c <= self.epsilon {
            return Err(invalid(format!(
                "c = {} must exceed epsilon = {}",
                self.c, self.epsilon
            )));
        }
        Ok(())
    }

    /// `|a + 1|`, the exponential rate of `√f` at infinity.
    pub fn alpha(&self) -> f64 {
        (self.a + 1.0).abs()
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.a == -1.0
    }
}

/// Value and first two derivatives of a scalar function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Logarithmic jets of both warp factors at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricJet {
    pub log_f: Jet,
    pub log_g: Jet,
}

impl MetricJet {
    pub fn f(&self) -> f64 {
        self.log_f.value.exp()
    }

    pub fn g(&self) -> f64 {
        self.log_g.value.exp()
    }

    /// `(f, f', f'')`.
    pub fn f_derivatives(&self) -> (f64, f64, f64) {
        exp_jet(self.log_f)
    }

    /// `(g, g', g'')`.
    pub fn g_derivatives(&self) -> (f64, f64, f64) {
        exp_jet(self.log_g)
    }
}

fn exp_jet(log: Jet) -> (f64, f64, f64) {
    let v = log.value.exp();
    (v, log.d1 * v, (log.d2 + log.d1 * log.d1) * v)
}

/// A radial warp `ds² = f(x) dx² + g(x) dθ²` described through log-jets.
pub trait Warp {
    fn jet(&self, x: f64) -> MetricJet;
}

/// Quintic polynomial matching value, slope and curvature at both ends of
/// `[x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticHermite {
    x0: f64,
    coeffs: [f64; 6],
}

impl QuinticHermite {
    pub fn new(x0: f64, left: Jet, x1: f64, right: Jet) -> Self {
        let h = x1 - x0;
        let c0 = left.value;
        let c1 = left.d1;
        let c2 = 0.5 * left.d2;
        let dv = right.value - (c0 + c1 * h + c2 * h * h);
        let dd1 = right.d1 - (c1 + 2.0 * c2 * h);
        let dd2 = right.d2 - 2.0 * c2;
        let c3 = (20.0 * dv - 8.0 * dd1 * h + dd2 * h * h) / (2.0 * h.powi(3));
        let c4 = (-30.0 * dv + 14.0 * dd1 * h - 2.0 * dd2 * h * h) / (2.0 * h.powi(4));
        let c5 = (12.0 * dv - 6.0 * dd1 * h + dd2 * h * h) / (2.0 * h.powi(5));
        Self { x0, coeffs: [c0, c1, c2, c3, c4, c5] }
    }

    pub fn eval(&self, x: f64) -> Jet {
        let s = x - self.x0;
        let c = &self.coeffs;
        let value = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
        let d1 = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
        let d2 = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
        Jet { value, d1, d2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Euclidean,
    Bridge,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricProfile {
    params: WarpParams,
    bridge_log_f: QuinticHermite,
    bridge_log_g: QuinticHermite,
}

pub fn build_profile(params: WarpParams) -> Result<MetricProfile> {
    MetricProfile::new(params)
}

impl MetricProfile {
    pub fn new(params: WarpParams) -> Result<Self> {
        params.validate()?;
        let WarpParams { a, b, epsilon, c, .. } = params;
        let bridge_log_f = QuinticHermite::new(
            epsilon,
            euclidean_log_f(epsilon),
            c,
            asymptotic_log_f(a, c),
        );
        let bridge_log_g = QuinticHermite::new(
            epsilon,
            euclidean_log_g(epsilon),
            c,
            asymptotic_log_g(b, c),
        );
        Ok(Self { params, bridge_log_f, bridge_log_g })
    }

    pub fn params(&self) -> &WarpParams {
        &self.params
    }

    pub fn region(&self, t: f64) -> Region {
        if t < self.params.epsilon {
            Region::Euclidean
        } else if t <= self.params.c {
            Region::Bridge
        } else {
            Region::Asymptotic
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        self.jet(t).f()
    }

    pub fn g(&self, t: f64) -> f64 {
        self.jet(t).g()
    }

    /// `√f(t)`, the integrand of the arclength coordinate.
    pub fn sqrt_f(&self, t: f64) -> f64 {
        (0.5 * self.log_f(t).value).exp()
    }

    pub fn log_f(&self, t: f64) -> Jet {
        match self.region(t) {
            Region::Euclidean => euclidean_log_f(t),
            Region::Bridge => self.bridge_log_f.eval(t),
            Region::Asymptotic => asymptotic_log_f(self.params.a, t),
        }
    }

    pub fn log_g(&self, t: f64) -> Jet {
        match self.region(t) {
            Region::Euclidean => euclidean_log_g(t),
            Region::Bridge => self.bridge_log_g.eval(t),
            Region::Asymptotic => asymptotic_log_g(self.params.b, t),
        }
    }
}

impl Warp for MetricProfile {
    fn jet(&self, t: f64) -> MetricJet {
        MetricJet { log_f: self.log_f(t), log_g: self.log_g(t) }
    }
}

fn euclidean_log_f(_t: f64) -> Jet {
    Jet::default()
}

fn euclidean_log_g(t: f64) -> Jet {
    Jet { value: 2.0 * t.ln(), d1: 2.0 / t, d2: -2.0 / (t * t) }
}

fn asymptotic_log_f(a: f64, t: f64) -> Jet {
    let slope = -2.0 * (a + 1.0);
    Jet { value: slope * t, d1: slope, d2: 0.0 }
}

fn asymptotic_log_g(b: f64, t: f64) -> Jet {
    let slope = -2.0 * b;
    Jet { value: slope * t, d1: slope, d2: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(a: f64, b: f64) -> MetricProfile {
        build_profile(WarpParams::new(3, a, b, 1.0, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(WarpParams::new(3, -0.5, 1.0, 1.0, 2.0).is_err());
        assert!(WarpParams::new(3, -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(WarpParams::new(3, -1.0, 1.0, 2.0, 1.0).is_err());
        assert!(WarpParams::new(3, -1.0, 1.0, 0.0, 1.0).is_err());
        assert!(WarpParams::new(1, -1.0, 1.0, 1.0, 2.0).is_err());
        assert!(WarpParams::new(3, f64::NAN, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn outer_regions_are_exact() {
        let p = profile(-1.0, -1.0);
        assert_eq!(p.f(0.5), 1.0);
        assert!((p.g(0.5) - 0.25).abs() < 1e-15);
        assert_eq!(p.f(3.0), 1.0);
        assert!((p.g(3.0) - 403.428_793_492_735_1).abs() < 1e-9);

        let q = profile(-2.0, 1.0);
        assert!((q.f(3.0) - 6f64.exp()).abs() < 1e-10);
        assert!((q.g(3.0) - (-6f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn hermite_matches_end_conditions() {
        let left = Jet { value: 0.3, d1: -1.2, d2: 4.0 };
        let right = Jet { value: -2.0, d1: 0.7, d2: -0.5 };
        let poly = QuinticHermite::new(0.4, left, 1.9, right);
        let l = poly.eval(0.4);
        let r = poly.eval(1.9);
        for (got, want) in [(l, left), (r, right)] {
            assert!((got.value - want.value).abs() < 1e-12);
            assert!((got.d1 - want.d1).abs() < 1e-11);
            assert!((got.d2 - want.d2).abs() < 1e-10);
        }
    }

    #[test]
    fn bridge_of_f_is_flat_when_a_is_minus_one() {
        let p = profile(-1.0, 0.7);
        for i in 0..=50 {
            let t = 1.0 + i as f64 / 50.0;
            let j = p.log_f(t);
            assert!(j.value.abs() < 1e-14 && j.d1.abs() < 1e-13 && j.d2.abs() < 1e-12);
        }
    }

    #[test]
    fn junctions_are_c2() {
        for &(a, b) in &[(-1.0, -1.0), (-2.0, 0.5), (-1.5, 0.0), (-3.0, -2.0)] {
            let p = profile(a, b);
            for &x in &[1.0, 2.0] {
                let tiny = 1e-12;
                let lo = p.jet(x - tiny);
                let hi = p.jet(x + tiny);
                for (u, v) in [(lo.log_f, hi.log_f), (lo.log_g, hi.log_g)] {
                    assert!((u.value - v.value).abs() < 1e-9, "value jump at {x}");
                    assert!((u.d1 - v.d1).abs() < 1e-9, "slope jump at {x}");
                    assert!((u.d2 - v.d2).abs() < 1e-8, "curvature jump at {x}");
                }
            }
        }
    }

    /// One-sided finite differences of f, g and their derivatives on either
    /// side of a junction converge to the same limit as h shrinks.
    #[test]
    fn junction_one_sided_differences_converge() {
        let p = profile(-2.0, -1.0);
        for &x in &[1.0, 2.0] {
            let mut previous_gap = f64::INFINITY;
            for k in 0..4 {
                let h = 1e-2 / 2f64.powi(k);
                // second-order one-sided first derivatives of f and g
                let left = |fun: &dyn Fn(f64) -> f64| {
                    (3.0 * fun(x - 1e-15) - 4.0 * fun(x - h) + fun(x - 2.0 * h)) / (2.0 * h)
                };
                let right = |fun: &dyn Fn(f64) -> f64| {
                    (-3.0 * fun(x + 1e-15) + 4.0 * fun(x + h) - fun(x + 2.0 * h)) / (2.0 * h)
                };
                let f = |t: f64| p.f(t);
                let g = |t: f64| p.g(t);
                let gap = (left(&f) - right(&f)).abs() + (left(&g) - right(&g)).abs();
                assert!(gap <= previous_gap * 0.3 + 1e-9, "gap {gap} vs {previous_gap}");
                previous_gap = gap;
            }
        }
    }

    #[test]
    fn warp_factors_are_positive() {
        for &(a, b) in &[(-1.0, -1.0), (-1.0, 2.0), (-2.0, 0.5), (-4.0, -3.0)] {
            let p = profile(a, b);
            for i in 0..10_000 {
                let t = 10f64.powf(-6.0 + 9.0 * i as f64 / 9_999.0);
                let j = p.jet(t);
                assert!(j.log_f.value.is_finite() && j.log_g.value.is_finite());
                // past t ≈ 100 the factors themselves leave the f64 range
                if t < 100.0 {
                    assert!(p.f(t) > 0.0 && p.g(t) > 0.0, "non-positive at t = {t}");
                }
            }
        }
    }
}
