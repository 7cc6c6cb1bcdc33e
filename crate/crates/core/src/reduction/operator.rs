use std::sync::Arc;

use serde::Serialize;

use super::{coupling_from_jet, liouville_correction, FormCoefficients, GeneralPotential, PotentialKind};
use crate::arclength::{ArclengthMap, RadialWarp};
use crate::error::{invalid, Error, Result};
use crate::metric::Warp;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// `a = −1`: exponential tails.
    Hyperbolic,
    /// `a < −1`: power tails in `r − c₁`.
    Steep { alpha: f64, c1: f64 },
}

/// Parameters and region constants of one reduced operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub dim: usize,
    pub p: usize,
    /// Sphere eigenvalue; for `TypeII` and `CouplingV3` this is the
    /// `(p − 1)`-form eigenvalue.
    pub lambda: f64,
    pub b: f64,
    pub epsilon: f64,
    pub c_bar: f64,
    pub regime: Regime,
    /// `((N−2p−1)/2)² b²`.
    pub threshold_1: f64,
    /// `((N−2p+1)/2)² b²`.
    pub threshold_2: f64,
    pub k_tilde_1: Option<f64>,
    pub k_tilde_2: Option<f64>,
}

impl PotentialSpec {
    pub fn new(map: &ArclengthMap, kind: PotentialKind, p: usize, lambda: f64) -> Result<Self> {
        let params = *map.profile().params();
        let dim = params.dim;
        let ok = match kind {
            PotentialKind::TypeI => p < dim,
            PotentialKind::TypeII => (1..=dim).contains(&p),
            PotentialKind::CouplingV3 => (1..dim).contains(&p),
        };
        if !ok {
            return Err(invalid(format!("degree p = {p} out of range for {kind:?} with N = {dim}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("sphere eigenvalue {lambda} must be finite and non-negative")));
        }
        let b = params.b;
        let m = dim as f64 - 2.0 * p as f64 - 1.0;
        let n = m + 2.0;
        let regime = match map.c1() {
            None => Regime::Hyperbolic,
            Some(c1) => Regime::Steep { alpha: params.alpha(), c1 },
        };
        let k_tilde = |s: f64| match regime {
            Regime::Hyperbolic => None,
            Regime::Steep { alpha, .. } => Some((s / 2.0).powi(2) * b * b / (alpha * alpha) + s / 2.0 * b / alpha),
        };
        Ok(Self {
            kind,
            dim,
            p,
            lambda,
            b,
            epsilon: params.epsilon,
            c_bar: map.c_bar(),
            regime,
            threshold_1: (m / 2.0).powi(2) * b * b,
            threshold_2: (n / 2.0).powi(2) * b * b,
            k_tilde_1: k_tilde(m),
            // type II is type I at degree N − p, where N − 2p' − 1 = −n
            k_tilde_2: k_tilde(-n),
        })
    }

    /// The same parameters viewed as a scalar operator of another kind.
    pub fn with_kind(&self, kind: PotentialKind) -> Self {
        Self { kind, ..*self }
    }
}

/// Which of the two equivalent evaluations of `V(r)` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvaluationPath {
    /// General formula in `t` plus the potential produced by `t ↦ r`.
    #[default]
    Transformed,
    /// General formula applied to the metric `dr² + g̃(r) dθ²`.
    Direct,
}

/// `−u'' + V(r) u` on the half-line.
#[derive(Debug, Clone)]
pub struct ScalarOperator {
    spec: PotentialSpec,
    potential: GeneralPotential,
    map: Arc<ArclengthMap>,
}

impl ScalarOperator {
    pub fn new(map: Arc<ArclengthMap>, spec: PotentialSpec) -> Self {
        let coefficients = FormCoefficients::for_kind(spec.kind, spec.dim, spec.p);
        Self { spec, potential: GeneralPotential::new(coefficients, spec.lambda), map }
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn map(&self) -> &ArclengthMap {
        &self.map
    }

    pub fn potential(&self, r: f64) -> Result<f64> {
        self.potential_via(EvaluationPath::Transformed, r)
    }

    pub fn potential_direct(&self, r: f64) -> Result<f64> {
        self.potential_via(EvaluationPath::Direct, r)
    }

    pub fn potential_via(&self, path: EvaluationPath, r: f64) -> Result<f64> {
        let v = match path {
            EvaluationPath::Transformed => {
                let jet = self.map.profile().jet(self.map.t(r)?);
                self.potential.eval_jet(&jet) + liouville_correction(&jet)
            }
            EvaluationPath::Direct => self.potential.eval_jet(&RadialWarp::new(&self.map).try_jet(r)?),
        };
        finite(v, r)
    }
}

/// The type III pair: diagonal `(V₁, V₂)` at degree `p` with the
/// `(p−1)`-form eigenvalue, off-diagonal `V₃(r)√λ` in both corners.
#[derive(Debug, Clone)]
pub struct CoupledOperator {
    spec: PotentialSpec,
    upper: ScalarOperator,
    lower: ScalarOperator,
    sqrt_lambda: f64,
}

impl CoupledOperator {
    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn map(&self) -> &ArclengthMap {
        self.upper.map()
    }

    pub fn upper(&self) -> &ScalarOperator {
        &self.upper
    }

    pub fn lower(&self) -> &ScalarOperator {
        &self.lower
    }

    pub fn coupling(&self, r: f64) -> Result<f64> {
        self.coupling_via(EvaluationPath::Transformed, r)
    }

    pub fn coupling_via(&self, path: EvaluationPath, r: f64) -> Result<f64> {
        let map = self.map();
        let jet = match path {
            EvaluationPath::Transformed => map.profile().jet(map.t(r)?),
            EvaluationPath::Direct => RadialWarp::new(map).try_jet(r)?,
        };
        finite(coupling_from_jet(&jet) * self.sqrt_lambda, r)
    }

    /// The symmetric 2×2 potential matrix at `r`.
    pub fn matrix(&self, r: f64) -> Result<[[f64; 2]; 2]> {
        let off = self.coupling(r)?;
        Ok([[self.upper.potential(r)?, off], [off, self.lower.potential(r)?]])
    }
}

#[derive(Debug, Clone)]
pub enum ReducedOperator {
    Scalar(ScalarOperator),
    Coupled(CoupledOperator),
}

impl ReducedOperator {
    pub fn spec(&self) -> &PotentialSpec {
        match self {
            Self::Scalar(s) => s.spec(),
            Self::Coupled(c) => c.spec(),
        }
    }

    pub fn map(&self) -> &ArclengthMap {
        match self {
            Self::Scalar(s) => s.map(),
            Self::Coupled(c) => c.map(),
        }
    }

    /// Number of components: 1 or 2.
    pub fn components(&self) -> usize {
        match self {
            Self::Scalar(_) => 1,
            Self::Coupled(_) => 2,
        }
    }
}

/// Builds the operator `−d²/dr² + V(r)` of the given kind.
pub fn to_arclength(map: Arc<ArclengthMap>, kind: PotentialKind, p: usize, lambda: f64) -> Result<ReducedOperator> {
    if kind == PotentialKind::CouplingV3 {
        return assemble_type3(map, p, lambda).map(ReducedOperator::Coupled);
    }
    let spec = PotentialSpec::new(&map, kind, p, lambda)?;
    Ok(ReducedOperator::Scalar(ScalarOperator::new(map, spec)))
}

pub fn assemble_type3(map: Arc<ArclengthMap>, p: usize, lambda: f64) -> Result<CoupledOperator> {
    if !(lambda > 0.0) {
        return Err(invalid("the coupled pair needs a positive (p-1)-form eigenvalue"));
    }
    let spec = PotentialSpec::new(&map, PotentialKind::CouplingV3, p, lambda)?;
    Ok(CoupledOperator {
        upper: ScalarOperator::new(map.clone(), spec.with_kind(PotentialKind::TypeI)),
        lower: ScalarOperator::new(map, spec.with_kind(PotentialKind::TypeII)),
        sqrt_lambda: lambda.sqrt(),
        spec,
    })
}

fn finite(v: f64, r: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinitePotential { r })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arclength::arclength;
    use crate::metric::{build_profile, WarpParams};
    use crate::reduction::{closed_form_coupling, closed_form_potential};

    fn map(dim: usize, a: f64, b: f64) -> Arc<ArclengthMap> {
        Arc::new(arclength(&build_profile(WarpParams::new(dim, a, b, 1.0, 2.0).unwrap()).unwrap()).unwrap())
    }

    fn scalar(m: &Arc<ArclengthMap>, kind: PotentialKind, p: usize, lambda: f64) -> ScalarOperator {
        match to_arclength(m.clone(), kind, p, lambda).unwrap() {
            ReducedOperator::Scalar(s) => s,
            _ => unreachable!(),
        }
    }

    #[test]
    fn hyperbolic_tail_example() {
        let m = map(3, -1.0, -1.0);
        let op = scalar(&m, PotentialKind::TypeI, 0, 2.0);
        let r = m.c_bar() + 2.0;
        let want = 1.0 + 2.0 * (-2.0 * r).exp();
        assert!((op.potential(r).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn steep_tail_decays_faster_than_inverse_square() {
        let m = map(3, -2.0, -1.0);
        let op = scalar(&m, PotentialKind::TypeI, 0, 0.0);
        assert_eq!(op.spec().k_tilde_1, Some(0.0));
        for &r in &[10.0, 50.0, 200.0] {
            assert!(op.potential(r).unwrap().abs() * r * r < 1e-8);
        }
    }

    #[test]
    fn near_origin_inverse_square() {
        let m = map(5, -1.5, 0.5);
        let op = scalar(&m, PotentialKind::TypeI, 0, 4.0);
        // ((5−1)/2)((5−3)/2) + 4 = 6
        for &r in &[1e-3, 0.1, 0.9] {
            assert!((op.potential(r).unwrap() * r * r - 6.0).abs() < 1e-10);
        }
        let (r0, r1) = (1e-4, 1e-2);
        let slope = (op.potential(r1).unwrap().ln() - op.potential(r0).unwrap().ln()) / (r1 / r0).ln();
        assert!((slope + 2.0).abs() < 1e-3);
    }

    #[test]
    fn paths_agree_across_bridge() {
        for &(a, b) in &[(-1.0, -1.0), (-2.0, 0.5), (-3.0, -0.5)] {
            let m = map(4, a, b);
            for p in 1..4 {
                let op = scalar(&m, PotentialKind::TypeII, p, 3.0);
                for i in 1..200 {
                    let r = 0.05 + i as f64 * 0.03;
                    let (x, y) = (op.potential(r).unwrap(), op.potential_direct(r).unwrap());
                    assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0), "a={a} p={p} r={r}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn closed_forms_in_pure_regions() {
        for &(a, b) in &[(-1.0, -1.0), (-1.0, 0.5), (-2.0, -1.0), (-2.5, 1.0)] {
            let m = map(4, a, b);
            for p in 1..4 {
                let lambda = 6.0;
                let c3 = assemble_type3(m.clone(), p, lambda).unwrap();
                for &r in &[0.01, 0.5, m.c_bar() + 0.5, m.c_bar() + 7.0] {
                    let mat = c3.matrix(r).unwrap();
                    let v1 = closed_form_potential(c3.upper().spec(), r).unwrap();
                    let v2 = closed_form_potential(c3.lower().spec(), r).unwrap();
                    let v3 = closed_form_coupling(c3.spec(), r).unwrap() * lambda.sqrt();
                    for (got, want) in [(mat[0][0], v1), (mat[1][1], v2), (mat[0][1], v3)] {
                        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "a={a} p={p} r={r}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn type3_symmetric_and_scaled() {
        let m = map(3, -1.0, -1.0);
        let c3 = assemble_type3(m.clone(), 1, 2.0).unwrap();
        let mat = c3.matrix(0.5).unwrap();
        assert_eq!(mat[0][1], mat[1][0]);
        assert!((mat[0][1] - 8.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(assemble_type3(m.clone(), 1, 0.0).is_err());
        assert!(assemble_type3(m.clone(), 0, 2.0).is_err());
        assert!(to_arclength(m, PotentialKind::TypeI, 3, 1.0).is_err());
    }

    #[test]
    fn out_of_range_radius() {
        let m = map(3, -1.0, 1.0);
        let op = scalar(&m, PotentialKind::TypeI, 0, 0.0);
        assert!(matches!(op.potential(0.0), Err(Error::OutOfRange { .. })));
        assert!(op.potential(-1.0).is_err());
    }
}
