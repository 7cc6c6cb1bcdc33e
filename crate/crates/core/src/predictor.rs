//! Closed-form spectral predictions from the warp exponents `(a, b)`.

use serde::Serialize;

use crate::eigensolver::{Outcome, SpectrumEstimate};
use crate::error::{invalid, Error, Result};
use crate::sphere_modes::{lowest_eigenvalue, SphereMode};

/// Default bound on `|numeric − predicted| / max(1, predicted)`.
pub const DEFAULT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Band {
    Empty,
    /// `[from, ∞)`.
    HalfLine { from: f64 },
    /// `{point} ∪ [from, ∞)`.
    PointAndHalfLine { point: f64, from: f64 },
}

impl Band {
    /// Where the continuum starts.
    pub fn threshold(&self) -> Option<f64> {
        match *self {
            Band::Empty => None,
            Band::HalfLine { from } | Band::PointAndHalfLine { from, .. } => Some(from),
        }
    }

    pub fn infimum(&self) -> Option<f64> {
        match *self {
            Band::Empty => None,
            Band::HalfLine { from } => Some(from),
            Band::PointAndHalfLine { point, from } => Some(point.min(from)),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Band::Empty => false,
            Band::HalfLine { from } => x >= from,
            Band::PointAndHalfLine { point, from } => x == point || x >= from,
        }
    }
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Band::Empty => write!(f, "empty"),
            Band::HalfLine { from } => write!(f, "[{from}, inf)"),
            Band::PointAndHalfLine { point, from } => write!(f, "{{{point}}} u [{from}, inf)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScStatus {
    Empty,
    /// Decided by the coupled type III operators; not settled.
    ReducesToTypeIii,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandPrediction {
    pub ess: Band,
    pub ac: Band,
    pub sc: ScStatus,
    /// Which row of the case table produced this.
    pub case: &'static str,
}

fn check(dim: usize, p: usize, a: f64, b: f64) -> Result<()> {
    if dim < 2 {
        return Err(invalid(format!("dimension N = {dim} must be at least 2")));
    }
    if p > dim {
        return Err(invalid(format!("degree p = {p} exceeds N = {dim}")));
    }
    if !(a <= -1.0) || !a.is_finite() {
        return Err(invalid(format!("a = {a} must satisfy a <= -1")));
    }
    if !b.is_finite() {
        return Err(invalid(format!("b = {b} must be finite")));
    }
    Ok(())
}

fn interior(dim: usize, p: usize) -> bool {
    1 < p && p + 1 < dim
}

/// `min(λ₀ᵖ, λ₀^{p−1})` over the full Hodge spectra of the sphere; only
/// one term exists at `p = 0` and `p = N`.
pub fn lambda_bar(dim: usize, p: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    if p < dim {
        best = best.min(lowest_eigenvalue(dim, p)?);
    }
    if p >= 1 {
        best = best.min(lowest_eigenvalue(dim, p - 1)?);
    }
    Ok(best)
}

/// Essential, absolutely continuous and singular continuous spectrum of the
/// Hodge Laplacian on `p`-forms.
pub fn predict(dim: usize, p: usize, a: f64, b: f64) -> Result<BandPrediction> {
    check(dim, p, a, b)?;
    let n = dim as f64;
    let q = p as f64;
    let sc = if p == 0 || p == dim { ScStatus::Empty } else { ScStatus::ReducesToTypeIii };
    let hyperbolic = a == -1.0;
    let (ess, ac, case) = if b == 0.0 {
        let from = lambda_bar(dim, p)?;
        (Band::HalfLine { from }, Band::HalfLine { from }, "b=0")
    } else if b < 0.0 && hyperbolic {
        let m = n - 2.0 * q - 1.0;
        let k = n - 2.0 * q + 1.0;
        let from = (m * m).min(k * k) * b * b / 4.0;
        let ac = Band::HalfLine { from };
        if 2 * p == dim {
            (Band::PointAndHalfLine { point: 0.0, from }, ac, "a=-1,b<0,p=N/2")
        } else {
            (ac, ac, "a=-1,b<0")
        }
    } else if b < 0.0 {
        (Band::HalfLine { from: 0.0 }, Band::HalfLine { from: 0.0 }, "a<-1,b<0")
    } else if interior(dim, p) {
        (Band::Empty, Band::Empty, if hyperbolic { "a=-1,b>0,1<p<N-1" } else { "a<-1,b>0,1<p<N-1" })
    } else {
        let from = if hyperbolic { ((n - 1.0) / 2.0).powi(2) * b * b } else { 0.0 };
        let band = Band::HalfLine { from };
        (band, band, if hyperbolic { "a=-1,b>0" } else { "a<-1,b>0" })
    };
    Ok(BandPrediction { ess, ac, sc, case })
}

/// Prediction for the single type I operator of the mode with sphere
/// eigenvalue `lambda` (a coclosed `p`-form eigenvalue).
pub fn predict_mode(dim: usize, p: usize, a: f64, b: f64, lambda: f64) -> Result<BandPrediction> {
    check(dim, p, a, b)?;
    if p >= dim {
        return Err(invalid(format!("type I modes need p < N, got p = {p}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("sphere eigenvalue {lambda} must be non-negative")));
    }
    let m = dim as f64 - 2.0 * p as f64 - 1.0;
    let hyperbolic = a == -1.0;
    let (band, case) = if b == 0.0 {
        (Band::HalfLine { from: lambda }, "mode,b=0")
    } else if b < 0.0 && hyperbolic {
        (Band::HalfLine { from: (m / 2.0).powi(2) * b * b }, "mode,a=-1,b<0")
    } else if b < 0.0 {
        (Band::HalfLine { from: 0.0 }, "mode,a<-1,b<0")
    } else if lambda > 0.0 {
        (Band::Empty, "mode,b>0,lambda>0")
    } else if hyperbolic {
        (Band::HalfLine { from: (m / 2.0).powi(2) * b * b }, "mode,a=-1,b>0,lambda=0")
    } else {
        (Band::HalfLine { from: 0.0 }, "mode,a<-1,b>0,lambda=0")
    };
    Ok(BandPrediction { ess: band, ac: band, sc: ScStatus::Empty, case })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mechanism {
    AgmonKatoKuroda,
    Lavine,
    EmptyEssential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeClass {
    pub mechanism: Mechanism,
    /// Power of `1/r` in the tail of the perturbation; `None` when it
    /// decays faster than any power.
    pub decay_exponent: Option<f64>,
}

/// Which mechanism controls the continuous spectrum of the type I mode.
pub fn classify_regime(dim: usize, p: usize, a: f64, b: f64, lambda: f64) -> Result<RegimeClass> {
    check(dim, p, a, b)?;
    if b > 0.0 && lambda > 0.0 {
        return Ok(RegimeClass { mechanism: Mechanism::EmptyEssential, decay_exponent: None });
    }
    if a == -1.0 || b == 0.0 {
        return Ok(RegimeClass { mechanism: Mechanism::AgmonKatoKuroda, decay_exponent: None });
    }
    let alpha = (a + 1.0).abs();
    let half = (dim as f64 - 2.0 * p as f64 - 1.0) / 2.0;
    let k_tilde = half * half * b * b / (alpha * alpha) + half * b / alpha;
    let inverse_square = if k_tilde != 0.0 { Some(2.0) } else { None };
    if b < 0.0 && lambda > 0.0 {
        let gamma = 2.0 * b.abs() / alpha;
        let decay = Some(inverse_square.map_or(gamma, |s: f64| s.min(gamma)));
        let mechanism = if gamma <= 1.0 { Mechanism::Lavine } else { Mechanism::AgmonKatoKuroda };
        return Ok(RegimeClass { mechanism, decay_exponent: decay });
    }
    Ok(RegimeClass { mechanism: Mechanism::AgmonKatoKuroda, decay_exponent: inverse_square })
}

/// Relative deviation with a unit floor.
pub fn deviation(numeric: f64, predicted: f64) -> f64 {
    (numeric - predicted).abs() / predicted.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeComparison {
    pub mode_k: usize,
    pub lambda: f64,
    pub predicted: BandPrediction,
    pub outcome: Outcome,
    pub bottom: Option<f64>,
    pub uncertainty: f64,
    pub count_stable: bool,
    pub deviation: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub modes: Vec<ModeComparison>,
    /// Bottom of the union of the predicted mode bands.
    pub predicted_bottom: Option<f64>,
    /// Smallest numeric band bottom over the modes.
    pub bottom: Option<f64>,
    pub uncertainty: f64,
    pub count_stable: bool,
    pub deviation: Option<f64>,
    pub pass: bool,
}

fn compare(mode: &SphereMode, est: &SpectrumEstimate, pred: &BandPrediction, cutoff: f64, tol: f64) -> ModeComparison {
    let threshold = pred.ess.threshold();
    let (dev, pass) = match (threshold, est.outcome, est.bottom) {
        (Some(x), Outcome::Band, Some(y)) => {
            let d = deviation(y, x);
            (Some(d), d <= tol)
        }
        (None, Outcome::EmptyBelowCutoff, _) => (None, est.count_stable),
        // a band starting above the cutoff is invisible below it
        (Some(x), Outcome::EmptyBelowCutoff, _) => (None, x >= cutoff),
        _ => (None, false),
    };
    ModeComparison {
        mode_k: mode.k,
        lambda: mode.lambda,
        predicted: *pred,
        outcome: est.outcome,
        bottom: est.bottom,
        uncertainty: est.uncertainty,
        count_stable: est.count_stable,
        deviation: dev,
        pass,
    }
}

/// Per-mode comparison plus the union over modes: the predicted union
/// starts at the smallest mode threshold, the numeric one at the smallest
/// mode bottom.
pub fn aggregate_modes(
    estimates: &[(SphereMode, SpectrumEstimate)],
    predictions: &[BandPrediction],
    cutoff: f64,
    tolerance: f64,
) -> Result<AggregateReport> {
    if estimates.is_empty() {
        return Err(Error::Empty("no modes to aggregate".into()));
    }
    if estimates.len() != predictions.len() {
        return Err(invalid("one prediction per mode is required"));
    }
    let modes: Vec<ModeComparison> = estimates
        .iter()
        .zip(predictions)
        .map(|((m, e), p)| compare(m, e, p, cutoff, tolerance))
        .collect();
    let predicted_bottom = predictions.iter().filter_map(|p| p.ess.threshold()).reduce(f64::min);
    let lowest = modes
        .iter()
        .filter_map(|m| m.bottom.map(|b| (b, m.uncertainty)))
        .min_by(|x, y| x.0.total_cmp(&y.0));
    let deviation = match (lowest, predicted_bottom) {
        (Some((y, _)), Some(x)) => Some(deviation(y, x)),
        _ => None,
    };
    let union_ok = match (predicted_bottom, lowest) {
        (Some(_), Some(_)) => deviation.is_some_and(|d| d <= tolerance),
        (Some(x), None) => x >= cutoff,
        (None, None) => true,
        (None, Some(_)) => false,
    };
    Ok(AggregateReport {
        pass: union_ok && modes.iter().all(|m| m.pass),
        count_stable: modes.iter().all(|m| m.count_stable),
        predicted_bottom,
        bottom: lowest.map(|l| l.0),
        uncertainty: lowest.map_or(0.0, |l| l.1),
        deviation,
        modes,
    })
}
