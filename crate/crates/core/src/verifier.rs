//! Numerical checks of the unitary reductions.
//!
//! For a compactly supported `h` each check evaluates two things on a grid:
//! `A`, the fiber operator applied to `h` and then transformed, and `B`, the
//! reduced operator applied to the transformed `h`. Every outer derivative
//! is a 4th-order central difference with step `s`; everything else is
//! analytic. `max|A − B| / max|B|` must then fall like `s⁴`.
//!
//! The metric is only C² across `ε` and `c`, which costs two orders of the
//! difference stencil there, so test bumps should sit inside one region.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::metric::{MetricJet, MetricProfile, Warp, WarpParams};
use crate::quadrature::integrate;
use crate::reduction::{coupling_from_jet, FormCoefficients, GeneralPotential, PotentialKind};
use crate::sphere_modes::{closed_eigenvalues, coclosed_eigenvalues};

/// Exponent of the bump `(1 − u²)^m`. The reduction identity differentiates
/// `h` twice and the stencil error needs four more derivatives to be
/// continuous, so `m = 8` is the smallest even choice with margin.
const BUMP_POWER: i32 = 8;
const MIN_NODES: usize = 16;
/// Minimum observed order between successive refinement levels.
pub const ORDER_GATE: f64 = 3.5;

/// `A (1 − u²)⁸` on `[t₀, t₁]`, `u = (2t − t₀ − t₁)/(t₁ − t₀)`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestProfile {
    pub t0: f64,
    pub t1: f64,
    pub amplitude: f64,
}

impl TestProfile {
    pub fn new(t0: f64, t1: f64) -> Result<Self> {
        if !(t0 > 0.0 && t1 > t0 && t1.is_finite()) {
            return Err(invalid(format!("bump support [{t0}, {t1}] must lie in (0, ∞)")));
        }
        Ok(Self { t0, t1, amplitude: 1.0 })
    }

    pub fn scaled(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn width(&self) -> f64 {
        self.t1 - self.t0
    }

    /// `(h, h', h'')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        if t <= self.t0 || t >= self.t1 {
            return (0.0, 0.0, 0.0);
        }
        let du = 2.0 / self.width();
        let u = (2.0 * t - self.t0 - self.t1) / self.width();
        let q = 1.0 - u * u;
        let m = BUMP_POWER as f64;
        let h = q.powi(BUMP_POWER);
        let d1 = -2.0 * m * u * q.powi(BUMP_POWER - 1) * du;
        let d2 = (4.0 * m * (m - 1.0) * u * u * q.powi(BUMP_POWER - 2) - 2.0 * m * q.powi(BUMP_POWER - 1)) * du * du;
        (self.amplitude * h, self.amplitude * d1, self.amplitude * d2)
    }
}

/// Deliberate defects used to show that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    #[default]
    None,
    /// Exchange the two off-diagonal weights of the coupled fiber system.
    SwapCoupling,
    /// Use `−(N−1+2p)/8` as the type II cross coefficient.
    WrongTypeIICross,
}

fn derivative<F: Fn(f64) -> f64>(f: F, t: f64, s: f64) -> f64 {
    (f(t - 2.0 * s) - 8.0 * f(t - s) + 8.0 * f(t + s) - f(t + 2.0 * s)) / (12.0 * s)
}

/// `σ₁ = f^{1/4} g^{(N−2p−1)/4}`.
fn sigma1(jet: &MetricJet, q1: f64) -> f64 {
    (0.25 * jet.log_f.value + 0.5 * q1 * jet.log_g.value).exp()
}

/// `σ₂ = f^{−1/4} g^{(N−2p+1)/4}`.
fn sigma2(jet: &MetricJet, q2: f64) -> f64 {
    (-0.25 * jet.log_f.value + 0.5 * q2 * jet.log_g.value).exp()
}

struct Degree {
    q1: f64,
    q2: f64,
}

impl Degree {
    fn new(dim: usize, p: usize) -> Self {
        let base = dim as f64 - 2.0 * p as f64;
        Self { q1: (base - 1.0) / 2.0, q2: (base + 1.0) / 2.0 }
    }
}

/// Fiber type I operator `λh/g − f^{−1/2}g^{−q₁}(f^{−1/2}g^{q₁}h')'`.
fn fiber1(w: &MetricProfile, d: &Degree, lambda: f64, h: &TestProfile, t: f64, s: f64) -> f64 {
    let flux = |x: f64| {
        let j = w.jet(x);
        (-0.5 * j.log_f.value + d.q1 * j.log_g.value).exp() * h.eval(x).1
    };
    let j = w.jet(t);
    lambda * h.eval(t).0 * (-j.log_g.value).exp()
        - (-0.5 * j.log_f.value - d.q1 * j.log_g.value).exp() * derivative(flux, t, s)
}

/// Fiber type II operator `λh/g − (f^{−1/2}g^{−q₂}(f^{−1/2}g^{q₂}h)')'`.
fn fiber2(w: &MetricProfile, d: &Degree, lambda: f64, h: &TestProfile, t: f64, s: f64) -> f64 {
    let flux = |x: f64| {
        let j = w.jet(x);
        let (h0, h1, _) = h.eval(x);
        (-j.log_f.value).exp() * (h1 + h0 * (-0.5 * j.log_f.d1 + d.q2 * j.log_g.d1))
    };
    lambda * h.eval(t).0 * (-w.jet(t).log_g.value).exp() - derivative(flux, t, s)
}

/// `−(w'/f)' + V w` for `w = σ h`, where `log_sigma_slope` is `(ln σ)'`.
fn reduced<S, L>(
    w: &MetricProfile,
    v: &GeneralPotential,
    sigma: S,
    log_sigma_slope: L,
    h: &TestProfile,
    t: f64,
    s: f64,
) -> f64
where
    S: Fn(&MetricJet) -> f64,
    L: Fn(&MetricJet) -> f64,
{
    let flux = |x: f64| {
        let j = w.jet(x);
        let (h0, h1, _) = h.eval(x);
        (-j.log_f.value).exp() * sigma(&j) * (h1 + h0 * log_sigma_slope(&j))
    };
    let j = w.jet(t);
    -derivative(flux, t, s) + v.eval_jet(&j) * sigma(&j) * h.eval(t).0
}

fn nodes(support: (f64, f64), step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(invalid(format!("step {step} must be positive")));
    }
    let n = ((support.1 - support.0) / step).floor() as usize;
    if n < MIN_NODES {
        return Err(Error::GridTooCoarse { nodes: n, required: MIN_NODES });
    }
    if support.0 - 2.0 * step <= 0.0 {
        return Err(invalid("difference stencil reaches t ≤ 0"));
    }
    Ok((1..n).map(|i| support.0 + i as f64 * step).collect())
}

fn relative(diffs: impl Iterator<Item = (f64, f64)>) -> Result<f64> {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for (a, b) in diffs {
        num = num.max((a - b).abs());
        den = den.max(b.abs());
    }
    if !(den > 0.0) || !num.is_finite() {
        return Err(Error::NonConvergence { residual: num });
    }
    Ok(num / den)
}

fn check_degree(profile: &MetricProfile, kind: PotentialKind, p: usize) -> Result<usize> {
    let dim = profile.params().dim;
    let ok = match kind {
        PotentialKind::TypeI => p < dim,
        PotentialKind::TypeII => (1..=dim).contains(&p),
        PotentialKind::CouplingV3 => (1..dim).contains(&p),
    };
    if ok {
        Ok(dim)
    } else {
        Err(invalid(format!("degree {p} out of range for N = {dim}")))
    }
}

pub fn check_type1_reduction(profile: &MetricProfile, p: usize, lambda: f64, h: &TestProfile, step: f64) -> Result<f64> {
    let dim = check_degree(profile, PotentialKind::TypeI, p)?;
    let d = Degree::new(dim, p);
    let v = GeneralPotential::new(FormCoefficients::type_i(dim, p), lambda);
    let slope = |j: &MetricJet| 0.25 * j.log_f.d1 + 0.5 * d.q1 * j.log_g.d1;
    let pts = nodes((h.t0, h.t1), step)?;
    relative(pts.iter().map(|&t| {
        let a = sigma1(&profile.jet(t), d.q1) * fiber1(profile, &d, lambda, h, t, step);
        let b = reduced(profile, &v, |j| sigma1(j, d.q1), slope, h, t, step);
        (a, b)
    }))
}

pub fn check_type2_reduction(
    profile: &MetricProfile,
    p: usize,
    lambda: f64,
    h: &TestProfile,
    step: f64,
    mutation: Mutation,
) -> Result<f64> {
    let dim = check_degree(profile, PotentialKind::TypeII, p)?;
    let d = Degree::new(dim, p);
    let coefficients = match mutation {
        Mutation::WrongTypeIICross => FormCoefficients::type_ii_wrong_cross(dim, p),
        _ => FormCoefficients::type_ii(dim, p),
    };
    let v = GeneralPotential::new(coefficients, lambda);
    let slope = |j: &MetricJet| -0.25 * j.log_f.d1 + 0.5 * d.q2 * j.log_g.d1;
    let pts = nodes((h.t0, h.t1), step)?;
    relative(pts.iter().map(|&t| {
        let a = sigma2(&profile.jet(t), d.q2) * fiber2(profile, &d, lambda, h, t, step);
        let b = reduced(profile, &v, |j| sigma2(j, d.q2), slope, h, t, step);
        (a, b)
    }))
}

/// Coupled check: `(h₁, h₂)` against the symmetric reduced pair.
#[allow(clippy::too_many_arguments)]
pub fn check_type3_reduction(
    profile: &MetricProfile,
    p: usize,
    lambda: f64,
    h1: &TestProfile,
    h2: &TestProfile,
    step: f64,
    mutation: Mutation,
) -> Result<f64> {
    let dim = check_degree(profile, PotentialKind::CouplingV3, p)?;
    if !(lambda > 0.0) {
        return Err(invalid("the coupled pair needs a positive eigenvalue"));
    }
    let d = Degree::new(dim, p);
    let root = lambda.sqrt();
    let v1 = GeneralPotential::new(FormCoefficients::type_i(dim, p), lambda);
    let v2 = GeneralPotential::new(FormCoefficients::type_ii(dim, p), lambda);
    let slope1 = |j: &MetricJet| 0.25 * j.log_f.d1 + 0.5 * d.q1 * j.log_g.d1;
    let slope2 = |j: &MetricJet| -0.25 * j.log_f.d1 + 0.5 * d.q2 * j.log_g.d1;
    // fiber off-diagonal weights g'/(fg) and g'/g²
    let c12 = |j: &MetricJet| (-j.log_f.value).exp() * j.log_g.d1;
    let c21 = |j: &MetricJet| (-j.log_g.value).exp() * j.log_g.d1;
    let (w12, w21): (&dyn Fn(&MetricJet) -> f64, &dyn Fn(&MetricJet) -> f64) = match mutation {
        Mutation::SwapCoupling => (&c21, &c12),
        _ => (&c12, &c21),
    };
    let pts = nodes((h1.t0.min(h2.t0), h1.t1.max(h2.t1)), step)?;
    let mut pairs = Vec::with_capacity(2 * pts.len());
    for &t in &pts {
        let j = profile.jet(t);
        let (s1, s2) = (sigma1(&j, d.q1), sigma2(&j, d.q2));
        let (x1, x2) = (h1.eval(t).0, h2.eval(t).0);
        let a1 = s1 * (fiber1(profile, &d, lambda, h1, t, step) + w12(&j) * root * x2);
        let a2 = s2 * (fiber2(profile, &d, lambda, h2, t, step) + w21(&j) * root * x1);
        let v3 = coupling_from_jet(&j) * root;
        let b1 = reduced(profile, &v1, |j| sigma1(j, d.q1), slope1, h1, t, step) + v3 * s2 * x2;
        let b2 = reduced(profile, &v2, |j| sigma2(j, d.q2), slope2, h2, t, step) + v3 * s1 * x1;
        pairs.push((a1, b1));
        pairs.push((a2, b2));
    }
    relative(pairs.into_iter())
}

/// Relative gap between `∫ weight·h² dt` and `∫ w² dt` for the type I or
/// type II transform.
pub fn norm_defect(profile: &MetricProfile, kind: PotentialKind, p: usize, h: &TestProfile) -> Result<f64> {
    let dim = check_degree(profile, kind, p)?;
    let d = Degree::new(dim, p);
    let (weight, sigma): (Box<dyn Fn(&MetricJet) -> f64>, Box<dyn Fn(&MetricJet) -> f64>) = match kind {
        PotentialKind::TypeII => (
            Box::new(|j: &MetricJet| (-0.5 * j.log_f.value + d.q2 * j.log_g.value).exp()),
            Box::new(|j: &MetricJet| sigma2(j, d.q2)),
        ),
        _ => (
            Box::new(|j: &MetricJet| (0.5 * j.log_f.value + d.q1 * j.log_g.value).exp()),
            Box::new(|j: &MetricJet| sigma1(j, d.q1)),
        ),
    };
    let lhs = integrate(&|t: f64| weight(&profile.jet(t)) * h.eval(t).0.powi(2), h.t0, h.t1, 1e-13)?;
    let rhs = integrate(&|t: f64| (sigma(&profile.jet(t)) * h.eval(t).0).powi(2), h.t0, h.t1, 1e-13)?;
    Ok((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckParams {
    #[serde(rename = "N")]
    pub dim: usize,
    pub p: usize,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub mutation: Mutation,
}

/// One JSON line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub check: &'static str,
    pub params: CheckParams,
    pub step: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    pub check: &'static str,
    pub rows: Vec<ReportRow>,
    /// `log₂` of successive residual ratios.
    pub orders: Vec<f64>,
}

impl Convergence {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.orders.len() >= 3 && self.min_order() >= ORDER_GATE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub checks: Vec<Convergence>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Convergence::passed)
    }

    pub fn rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.checks.iter().flat_map(|c| c.rows.iter())
    }

    pub fn json_lines(&self) -> String {
        self.rows().map(|r| serde_json::to_string(r).expect("report rows serialize") + "\n").collect()
    }
}

/// Residuals over `levels` halvings of `coarse_step`.
pub fn convergence<F>(check: &'static str, params: CheckParams, coarse_step: f64, levels: usize, run: F) -> Result<Convergence>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let step = coarse_step / f64::powi(2.0, level as i32);
        rows.push(ReportRow { check, params, step, residual: run(step)? });
    }
    let orders = rows.windows(2).map(|w| (w[0].residual / w[1].residual).log2()).collect();
    Ok(Convergence { check, rows, orders })
}

/// The standard run: all three reductions on a warp with `a < −1`, whose
/// bridge carries nonzero `f'`, `f''`, `g'`, `g''`, over four levels.
pub fn run_suite(mutation: Mutation) -> Result<SuiteReport> {
    let params = WarpParams::new(5, -2.0, 0.5, 1.0, 2.0)?;
    let profile = crate::metric::build_profile(params)?;
    let p = 2;
    let lambda1 = coclosed_eigenvalues(5, p, 1)?[0].lambda;
    let lambda2 = closed_eigenvalues(5, p - 1, 1)?.iter().map(|m| m.lambda).find(|&l| l > 0.0).unwrap_or(1.0);
    let lambda3 = coclosed_eigenvalues(5, p - 1, 1)?[0].lambda;
    let h = TestProfile::new(1.1, 1.9)?;
    let h2 = TestProfile::new(1.15, 1.85)?.scaled(0.7);
    let coarse = h.width() / 32.0;
    let levels = 4;
    let tag = |lambda| CheckParams { dim: 5, p, lambda, a: params.a, b: params.b, mutation };
    let checks = vec![
        convergence("type1", tag(lambda1), coarse, levels, |s| check_type1_reduction(&profile, p, lambda1, &h, s))?,
        convergence("type2", tag(lambda2), coarse, levels, |s| {
            check_type2_reduction(&profile, p, lambda2, &h, s, mutation)
        })?,
        convergence("type3", tag(lambda3), coarse, levels, |s| {
            check_type3_reduction(&profile, p, lambda3, &h, &h2, s, mutation)
        })?,
    ];
    Ok(SuiteReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::build_profile;

    fn profile(dim: usize, a: f64, b: f64) -> MetricProfile {
        build_profile(WarpParams::new(dim, a, b, 1.0, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn bump_derivatives() {
        let h = TestProfile::new(0.5, 1.5).unwrap().scaled(2.0);
        assert_eq!(h.eval(1.0).0, 2.0);
        assert_eq!(h.eval(0.4), (0.0, 0.0, 0.0));
        for &t in &[0.6, 0.9, 1.3] {
            let s = 1e-4;
            let (_, d1, d2) = h.eval(t);
            assert!((derivative(|x| h.eval(x).0, t, s) - d1).abs() < 1e-9);
            assert!((derivative(|x| h.eval(x).1, t, s) - d2).abs() < 1e-8);
        }
    }

    #[test]
    fn euclidean_example() {
        let prof = profile(3, -1.0, 1.0);
        let h = TestProfile::new(0.1, 0.5).unwrap();
        let res = check_type1_reduction(&prof, 0, 0.0, &h, 1e-3).unwrap();
        assert!(res < 1e-6, "residual {res}");
    }

    #[test]
    fn fourth_order_on_bridge() {
        let report = run_suite(Mutation::None).unwrap();
        for c in &report.checks {
            assert!(c.passed(), "{} orders {:?} rows {:?}", c.check, c.orders, c.rows);
        }
    }

    #[test]
    fn mutations_are_caught() {
        for m in [Mutation::SwapCoupling, Mutation::WrongTypeIICross] {
            let report = run_suite(m).unwrap();
            assert!(!report.passed(), "{m:?} not detected");
        }
        let prof = profile(5, -2.0, 0.5);
        let (h1, h2) = (TestProfile::new(1.1, 1.9).unwrap(), TestProfile::new(1.15, 1.85).unwrap());
        let swapped = check_type3_reduction(&prof, 2, 6.0, &h1, &h2, 0.005, Mutation::SwapCoupling).unwrap();
        assert!(swapped > 1e-2, "swap residual {swapped}");
    }

    #[test]
    fn invariant_under_scaling() {
        let prof = profile(4, -1.5, -0.5);
        let h = TestProfile::new(1.1, 1.9).unwrap();
        let r1 = check_type1_reduction(&prof, 1, 3.0, &h, 0.01).unwrap();
        let r2 = check_type1_reduction(&prof, 1, 3.0, &h.scaled(-17.0), 0.01).unwrap();
        assert!((r1 - r2).abs() <= 1e-9 * r1);
    }

    #[test]
    fn norms_preserved() {
        let prof = profile(5, -2.5, 0.7);
        let h = TestProfile::new(0.4, 2.6).unwrap();
        for p in 1..5 {
            assert!(norm_defect(&prof, PotentialKind::TypeI, p, &h).unwrap() < 1e-12);
            assert!(norm_defect(&prof, PotentialKind::TypeII, p, &h).unwrap() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let prof = profile(3, -1.0, 1.0);
        let h = TestProfile::new(1.1, 1.9).unwrap();
        assert!(matches!(
            check_type1_reduction(&prof, 0, 0.0, &h, 0.1),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn json_rows() {
        let row = ReportRow {
            check: "type1",
            params: CheckParams { dim: 3, p: 0, lambda: 2.0, a: -1.0, b: 1.0, mutation: Mutation::None },
            step: 0.5,
            residual: 1e-3,
        };
        let line = serde_json::to_string(&row).unwrap();
        assert_eq!(
            line,
            r#"{"check":"type1","params":{"N":3,"p":0,"lambda":2.0,"a":-1.0,"b":1.0,"mutation":"none"},"step":0.5,"residual":0.001}"#
        );
    }
}
