use rayon::prelude::*;
use serde::Serialize;

use super::grid::{Grid, GridPolicy};
use super::matrix::{discretize, DiscretizedOperator};
use crate::error::{invalid, Result};
use crate::reduction::ReducedOperator;

/// How the low spectrum of one reduced operator is probed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderConfig {
    /// Increasing truncation lengths, at least three.
    pub ladder: Vec<f64>,
    pub policy: GridPolicy,
    /// Eigenvalues below this are counted.
    pub cutoff: f64,
    /// How many of the lowest eigenvalues are classified at each length.
    pub tracked: usize,
    /// A state drifts when it moves by more than `drift_tol·max(1, |E|)`
    /// between consecutive lengths.
    pub drift_tol: f64,
}

pub const DEFAULT_TRACKED: usize = 8;
pub const DEFAULT_DRIFT_TOL: f64 = 1e-8;
/// Share of the eigenvector mass beyond `c̄` above which a state counts as
/// living in the asymptotic region.
pub const MASS_THRESHOLD: f64 = 0.5;

impl LadderConfig {
    pub fn new(ladder: Vec<f64>, policy: GridPolicy, cutoff: f64) -> Result<Self> {
        Self { ladder, policy, cutoff, tracked: DEFAULT_TRACKED, drift_tol: DEFAULT_DRIFT_TOL }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.ladder.len() < 3 {
            return Err(invalid(format!("ladder needs at least 3 lengths, got {}", self.ladder.len())));
        }
        if !self.ladder.windows(2).all(|w| w[1] > w[0]) || !(self.ladder[0] > 0.0) {
            return Err(invalid("ladder lengths must be positive and increasing"));
        }
        if !self.cutoff.is_finite() || self.tracked == 0 {
            return Err(invalid("cutoff must be finite and at least one state tracked"));
        }
        self.policy.validated()?;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    /// Stable under lengthening and localized before `c̄`.
    Discrete,
    /// Drifts down as `L` grows and lives beyond `c̄`.
    Band,
    /// The two indicators disagree.
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSpectrum {
    #[serde(rename = "L")]
    pub length: f64,
    pub nodes: usize,
    pub eigenvalues: Vec<f64>,
    pub mass_beyond: Vec<f64>,
    pub classes: Vec<StateClass>,
    pub count_below_cutoff: usize,
}

impl LevelSpectrum {
    /// Lowest eigenvalue classified as a band state.
    pub fn band_bottom(&self) -> Option<f64> {
        self.eigenvalues.iter().zip(&self.classes).find(|(_, c)| **c == StateClass::Band).map(|(e, _)| *e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Band states were found; `bottom` estimates where the band starts.
    Band,
    /// No band below the cutoff and the count below it has settled.
    EmptyBelowCutoff,
    /// Neither conclusion is supported.
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    pub levels: Vec<LevelSpectrum>,
    pub bottom: Option<f64>,
    pub uncertainty: f64,
    /// Count below the cutoff equal at the two longest lengths.
    pub count_stable: bool,
    pub outcome: Outcome,
    /// Some tracked state could not be classified.
    pub flagged: bool,
}

/// Richardson step for an `O(L⁻²)` truncation error.
fn richardson(l1: f64, b1: f64, l2: f64, b2: f64) -> f64 {
    let q = (l2 / l1).powi(2);
    (q * b2 - b1) / (q - 1.0)
}

fn level(op: &ReducedOperator, config: &LadderConfig, length: f64) -> Result<(DiscretizedOperator, Vec<f64>, usize)> {
    let grid = Grid::new(&config.policy, length)?;
    let matrix = discretize(op, grid)?;
    let eigenvalues = matrix.lowest(config.tracked)?;
    let count = matrix.count_below(config.cutoff);
    Ok((matrix, eigenvalues, count))
}

/// Probes the low spectrum of `op` on each truncation length of the ladder.
///
/// A tracked state is a band state when its eigenvalue drifts under
/// lengthening and more than half its mass sits beyond `c̄`, discrete when
/// neither holds. The band bottom is Richardson-extrapolated over the last
/// three lengths; the spread of the two extrapolants is the uncertainty.
pub fn essential_bottom(op: &ReducedOperator, config: &LadderConfig) -> Result<SpectrumEstimate> {
    let config = config.clone().validated()?;
    let c_bar = op.spec().c_bar;
    let raw: Vec<_> = config.ladder.par_iter().map(|&l| level(op, &config, l)).collect::<Result<_>>()?;

    let drift = |i: usize, j: usize| -> Option<f64> {
        let other = if i + 1 < raw.len() { i + 1 } else { i - 1 };
        let (a, b) = (raw[i].1.get(j)?, raw[other].1.get(j)?);
        Some((a - b).abs())
    };
    let mut levels = Vec::with_capacity(raw.len());
    let mut flagged = false;
    for (i, (matrix, eigenvalues, count)) in raw.iter().enumerate() {
        let mut mass = Vec::with_capacity(eigenvalues.len());
        let mut classes = Vec::with_capacity(eigenvalues.len());
        for (j, &e) in eigenvalues.iter().enumerate() {
            let m = matrix.mass_beyond(&matrix.eigenvector(e)?, c_bar);
            let drifting = drift(i, j).is_none_or(|d| d > config.drift_tol * e.abs().max(1.0));
            let spread = m > MASS_THRESHOLD;
            let class = match (drifting, spread) {
                (true, true) => StateClass::Band,
                (false, false) => StateClass::Discrete,
                _ => StateClass::Ambiguous,
            };
            // only states below the cutoff matter for the verdict
            flagged |= class == StateClass::Ambiguous && e < config.cutoff;
            mass.push(m);
            classes.push(class);
        }
        levels.push(LevelSpectrum {
            length: config.ladder[i],
            nodes: matrix.order(),
            eigenvalues: eigenvalues.clone(),
            mass_beyond: mass,
            classes,
            count_below_cutoff: *count,
        });
    }

    let n = levels.len();
    let count_stable = levels[n - 1].count_below_cutoff == levels[n - 2].count_below_cutoff;
    let bottoms: Vec<Option<f64>> = levels.iter().map(LevelSpectrum::band_bottom).collect();
    let (b1, b2, b3) = (bottoms[n - 3], bottoms[n - 2], bottoms[n - 1]);
    let (l1, l2, l3) = (levels[n - 3].length, levels[n - 2].length, levels[n - 1].length);
    let band_below_cutoff = b3.is_some_and(|b| b < config.cutoff);

    let (bottom, uncertainty, outcome) = match (b1, b2, b3) {
        (Some(x1), Some(x2), Some(x3)) if band_below_cutoff => {
            let coarse = richardson(l1, x1, l2, x2);
            let fine = richardson(l2, x2, l3, x3);
            (Some(fine), (fine - coarse).abs(), Outcome::Band)
        }
        (_, Some(x2), Some(x3)) if band_below_cutoff => {
            let fine = richardson(l2, x2, l3, x3);
            flagged = true;
            (Some(fine), (x3 - fine).abs(), Outcome::Band)
        }
        _ if count_stable && !flagged => (None, 0.0, Outcome::EmptyBelowCutoff),
        _ => (None, 0.0, Outcome::Ambiguous),
    };
    Ok(SpectrumEstimate { levels, bottom, uncertainty, count_stable, outcome, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arclength::arclength;
    use crate::metric::{build_profile, WarpParams};
    use crate::reduction::{to_arclength, PotentialKind};
    use std::sync::Arc;

    fn operator(dim: usize, p: usize, a: f64, b: f64, lambda: f64) -> ReducedOperator {
        let map = arclength(&build_profile(WarpParams::new(dim, a, b, 1.0, 2.0).unwrap()).unwrap()).unwrap();
        to_arclength(Arc::new(map), PotentialKind::TypeI, p, lambda).unwrap()
    }

    fn config(cutoff: f64) -> LadderConfig {
        let policy = GridPolicy::for_ladder(1.0, 10.0, 1024).unwrap();
        LadderConfig::new(vec![10.0, 20.0, 40.0], policy, cutoff).unwrap()
    }

    #[test]
    fn richardson_removes_inverse_square() {
        let f = |l: f64| 1.5 + 3.0 / (l * l);
        assert!((richardson(10.0, f(10.0), 20.0, f(20.0)) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_band_bottom() {
        let est = essential_bottom(&operator(3, 0, -1.0, -1.0, 0.0), &config(10.0)).unwrap();
        assert_eq!(est.outcome, Outcome::Band);
        let bottom = est.bottom.unwrap();
        assert!((bottom - 1.0).abs() < 0.05, "bottom {bottom}");
        assert!(!est.count_stable);
    }

    #[test]
    fn growing_potential_has_no_band() {
        let est = essential_bottom(&operator(5, 2, -1.0, 1.0, 6.0), &config(50.0)).unwrap();
        assert_eq!(est.outcome, Outcome::EmptyBelowCutoff, "{est:?}");
        assert!(est.count_stable);
        assert!(est.levels.iter().all(|l| l.classes.iter().all(|c| *c == StateClass::Discrete)));
    }

    #[test]
    fn dirichlet_monotonicity() {
        let est = essential_bottom(&operator(4, 1, -1.5, -0.5, 3.0), &config(20.0)).unwrap();
        for w in est.levels.windows(2) {
            for (a, b) in w[0].eigenvalues.iter().zip(&w[1].eigenvalues) {
                assert!(b <= &(a + 1e-10 * a.abs().max(1.0)), "{a} -> {b}");
            }
        }
    }

    #[test]
    fn rejects_short_ladder() {
        let policy = GridPolicy::for_ladder(1.0, 10.0, 1024).unwrap();
        assert!(LadderConfig::new(vec![10.0, 20.0], policy, 1.0).is_err());
        assert!(LadderConfig::new(vec![10.0, 5.0, 20.0], policy, 1.0).is_err());
    }
}
