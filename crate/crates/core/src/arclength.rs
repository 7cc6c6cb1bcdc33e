//! The arclength coordinate `r(t) = ∫₀ᵗ √f(s) ds` and its inverse.
//!
//! In the Euclidean region `r = t`. Past `c` the integral has a closed form:
//! `r = t + K + ε − c` when `a = −1`, and `r − c₁ = e^{|a+1|t}/|a+1|` when
//! `a < −1`. Only the bridge needs quadrature; it is split into panels whose
//! cumulative integrals are computed once at construction.

use crate::error::{Error, Result};
use crate::metric::{Jet, MetricJet, MetricProfile, Warp};
use crate::quadrature::integrate;

const PANELS: usize = 32;
const QUAD_TOL: f64 = 1e-12;
const INVERSE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ArclengthMap {
    profile: MetricProfile,
    /// Panel breakpoints in `t` across `[ε, c]`.
    knots: Vec<f64>,
    /// `r` at each knot.
    cumulative: Vec<f64>,
    k: f64,
    c_bar: f64,
    c1: Option<f64>,
}

pub fn arclength(profile: &MetricProfile) -> Result<ArclengthMap> {
    ArclengthMap::new(profile.clone())
}

impl ArclengthMap {
    pub fn new(profile: MetricProfile) -> Result<Self> {
        let params = *profile.params();
        let (eps, c) = (params.epsilon, params.c);
        let knots: Vec<f64> = (0..=PANELS)
            .map(|i| eps + (c - eps) * i as f64 / PANELS as f64)
            .collect();
        let integrand = |s: f64| profile.sqrt_f(s);
        let mut cumulative = Vec::with_capacity(knots.len());
        cumulative.push(eps);
        for w in knots.windows(2) {
            let piece = integrate(&integrand, w[0], w[1], QUAD_TOL / PANELS as f64)?;
            cumulative.push(cumulative.last().unwrap() + piece);
        }
        let c_bar = *cumulative.last().unwrap();
        let k = c_bar - eps;
        let c1 = if params.is_hyperbolic() {
            None
        } else {
            let alpha = params.alpha();
            Some(c_bar - (alpha * c).exp() / alpha)
        };
        Ok(Self { profile, knots, cumulative, k, c_bar, c1 })
    }

    pub fn profile(&self) -> &MetricProfile {
        &self.profile
    }

    /// `K = ∫_ε^c √f`.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `c̄ = K + ε`, where the asymptotic region starts in `r`.
    pub fn c_bar(&self) -> f64 {
        self.c_bar
    }

    /// `c₁ = K + ε − e^{|a+1|c}/|a+1|`, defined only for `a < −1`.
    pub fn c1(&self) -> Option<f64> {
        self.c1
    }

    pub fn r(&self, t: f64) -> Result<f64> {
        let params = self.profile.params();
        let (eps, c) = (params.epsilon, params.c);
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("t = {t} must be positive and finite")));
        }
        if t <= eps {
            return Ok(t);
        }
        if t <= c {
            let i = self.panel_of_t(t);
            let piece = integrate(&|s: f64| self.profile.sqrt_f(s), self.knots[i], t, QUAD_TOL / PANELS as f64)?;
            return Ok(self.cumulative[i] + piece);
        }
        if params.is_hyperbolic() {
            return Ok(self.c_bar + (t - c));
        }
        let alpha = params.alpha();
        Ok(self.c_bar + (alpha * c).exp() * (alpha * (t - c)).exp_m1() / alpha)
    }

    /// Inverse of [`Self::r`].
    pub fn t(&self, r: f64) -> Result<f64> {
        let params = self.profile.params();
        let (eps, c) = (params.epsilon, params.c);
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::OutOfRange { r });
        }
        if r <= eps {
            return Ok(r);
        }
        if r >= self.c_bar {
            let t = if params.is_hyperbolic() {
                c + (r - self.c_bar)
            } else {
                let alpha = params.alpha();
                c + (alpha * (r - self.c_bar) * (-alpha * c).exp()).ln_1p() / alpha
            };
            return if t.is_finite() { Ok(t) } else { Err(Error::OutOfRange { r }) };
        }
        self.invert_bridge(r)
    }

    fn panel_of_t(&self, t: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= t);
        i.saturating_sub(1).min(PANELS - 1)
    }

    fn invert_bridge(&self, r: f64) -> Result<f64> {
        let i = self.cumulative.partition_point(|&v| v <= r).saturating_sub(1).min(PANELS - 1);
        let (mut lo, mut hi) = (self.knots[i], self.knots[i + 1]);
        let r_lo = self.cumulative[i];
        // Newton from the linear guess, bracketed by the panel
        let mut t = lo + (hi - lo) * (r - r_lo) / (self.cumulative[i + 1] - r_lo);
        for _ in 0..100 {
            let residual = r_lo
                + integrate(&|s: f64| self.profile.sqrt_f(s), self.knots[i], t, QUAD_TOL / PANELS as f64)?
                - r;
            if residual > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = residual / self.profile.sqrt_f(t);
            let mut next = t - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= INVERSE_TOL * 1e-2 || hi - lo <= INVERSE_TOL * 1e-2 {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::NonConvergence { residual: hi - lo })
    }
}

/// The metric rewritten in the arclength coordinate, `dr² + g̃(r) dθ²`.
///
/// Implements [`Warp`] with `f ≡ 1`, so the general potential formulas can
/// be evaluated directly in `r`.
#[derive(Debug, Clone, Copy)]
pub struct RadialWarp<'a> {
    map: &'a ArclengthMap,
}

impl<'a> RadialWarp<'a> {
    pub fn new(map: &'a ArclengthMap) -> Self {
        Self { map }
    }

    pub fn try_jet(&self, r: f64) -> Result<MetricJet> {
        let t = self.map.t(r)?;
        let jet = self.map.profile().jet(t);
        let (lf, lg) = (jet.log_f, jet.log_g);
        let inv_sqrt_f = (-0.5 * lf.value).exp();
        let inv_f = (-lf.value).exp();
        Ok(MetricJet {
            log_f: Jet::default(),
            log_g: Jet {
                value: lg.value,
                d1: lg.d1 * inv_sqrt_f,
                d2: inv_f * (lg.d2 - 0.5 * lf.d1 * lg.d1),
            },
        })
    }
}

impl Warp for RadialWarp<'_> {
    /// Panics if `r` is not a valid coordinate; use [`RadialWarp::try_jet`]
    /// to handle that case.
    fn jet(&self, r: f64) -> MetricJet {
        self.try_jet(r).expect("radial coordinate out of range")
    }
}
