use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{GridSettings, RunConfig};
use crate::arclength::{arclength, ArclengthMap};
use crate::eigensolver::{essential_bottom, LadderConfig, Outcome, SpectrumEstimate};
use crate::error::{Error, Result};
use crate::metric::build_profile;
use crate::predictor::{aggregate_modes, classify_regime, deviation, predict, predict_mode, Band, BandPrediction, RegimeClass};
use crate::reduction::{to_arclength, PotentialKind};
use crate::sphere_modes::{coclosed_eigenvalues, SphereMode};

#[derive(Debug, Clone, Serialize)]
pub struct ParamsOut {
    #[serde(rename = "N")]
    pub dim: usize,
    pub p: usize,
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub c: f64,
    pub kmax: usize,
    pub ladder: Vec<f64>,
    pub cutoff: f64,
    pub tolerance: f64,
    pub grid: GridSettings,
}

#[derive(Debug, Clone, Serialize)]
pub struct NumericOut {
    pub bottom: Option<f64>,
    pub uncertainty: f64,
    pub count_stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub pass: bool,
    /// Start of the union of the predicted type I mode bands.
    pub predicted_bottom: Option<f64>,
    pub deviation: Option<f64>,
    pub solver_errors: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeOut {
    pub mode_k: usize,
    pub lambda: f64,
    pub case: &'static str,
    pub predicted: Band,
    pub regime: RegimeClass,
    pub outcome: Option<Outcome>,
    pub bottom: Option<f64>,
    pub uncertainty: Option<f64>,
    pub count_stable: Option<bool>,
    pub deviation: Option<f64>,
    pub pass: bool,
    pub error: Option<String>,
}

/// Everything written for one form degree.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub params: ParamsOut,
    pub predicted: BandPrediction,
    pub numeric: NumericOut,
    pub regime: RegimeClass,
    pub verdict: Verdict,
    pub modes: Vec<ModeOut>,
}

impl DegreeReport {
    pub fn csv(&self) -> String {
        let length = *self.params.ladder.last().expect("validated ladder");
        let mut out = String::from("mode_k,lambda,L,bottom,uncertainty,classification\n");
        for m in &self.modes {
            let bottom = m.bottom.map(|b| b.to_string()).unwrap_or_default();
            let unc = m.uncertainty.map(|u| u.to_string()).unwrap_or_default();
            let class = match m.outcome {
                Some(Outcome::Band) => "band",
                Some(Outcome::EmptyBelowCutoff) => "empty_below_cutoff",
                Some(Outcome::Ambiguous) => "ambiguous",
                None => "solver_error",
            };
            let _ = writeln!(out, "{},{},{},{},{},{}", m.mode_k, m.lambda, length, bottom, unc, class);
        }
        out
    }

    pub fn summary(&self) -> String {
        let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        format!(
            "p={} modes={} predicted_bottom={} bottom={} deviation={} verdict={}",
            self.params.p,
            self.modes.len(),
            fmt(self.verdict.predicted_bottom),
            fmt(self.numeric.bottom),
            fmt(self.verdict.deviation),
            if self.verdict.pass { "pass" } else { "fail" },
        )
    }
}

/// Modes of every requested degree, checked before any solve.
pub fn sweep(config: &RunConfig) -> Result<Vec<(usize, Vec<SphereMode>)>> {
    let dim = config.params.dim;
    let mut out = Vec::with_capacity(config.degrees.len());
    for &p in &config.degrees {
        let modes = coclosed_eigenvalues(dim, p, config.kmax)?;
        if modes.is_empty() {
            return Err(Error::Empty(format!("no coclosed modes for p = {p} with kmax = {}", config.kmax)));
        }
        out.push((p, modes));
    }
    Ok(out)
}

fn solve(map: &Arc<ArclengthMap>, ladder: &LadderConfig, p: usize, mode: &SphereMode) -> Result<SpectrumEstimate> {
    let op = to_arclength(Arc::clone(map), PotentialKind::TypeI, p, mode.lambda)?;
    essential_bottom(&op, ladder)
}

/// Runs one degree. Solver failures stay attached to their mode.
pub fn run_degree(config: &RunConfig, map: &Arc<ArclengthMap>, p: usize, modes: &[SphereMode]) -> Result<DegreeReport> {
    let prm = &config.params;
    let ladder = LadderConfig::new(config.ladder.clone(), config.policy()?, config.cutoff)?;
    let results: Vec<Result<SpectrumEstimate>> = modes.par_iter().map(|m| solve(map, &ladder, p, m)).collect();

    let mut solved = Vec::new();
    let mut preds = Vec::new();
    let mut out = Vec::with_capacity(modes.len());
    for (mode, res) in modes.iter().zip(results) {
        let pred = predict_mode(prm.dim, p, prm.a, prm.b, mode.lambda)?;
        let regime = classify_regime(prm.dim, p, prm.a, prm.b, mode.lambda)?;
        let base = ModeOut {
            mode_k: mode.k,
            lambda: mode.lambda,
            case: pred.case,
            predicted: pred.ess,
            regime,
            outcome: None,
            bottom: None,
            uncertainty: None,
            count_stable: None,
            deviation: None,
            pass: false,
            error: None,
        };
        match res {
            Ok(est) => {
                solved.push((*mode, est));
                preds.push(pred);
                out.push(base);
            }
            Err(e) => out.push(ModeOut { error: Some(e.to_string()), ..base }),
        }
    }
    let solver_errors = out.iter().filter(|m| m.error.is_some()).count();

    let aggregate = if solved.is_empty() { None } else { Some(aggregate_modes(&solved, &preds, config.cutoff, config.tolerance)?) };
    if let Some(agg) = &aggregate {
        let mut cmp = agg.modes.iter();
        for m in out.iter_mut().filter(|m| m.error.is_none()) {
            let c = cmp.next().expect("one comparison per solved mode");
            m.outcome = Some(c.outcome);
            m.bottom = c.bottom;
            m.uncertainty = Some(c.uncertainty);
            m.count_stable = Some(c.count_stable);
            m.deviation = c.deviation;
            m.pass = c.pass;
        }
    }
    let predicted_bottom = modes
        .iter()
        .filter_map(|m| predict_mode(prm.dim, p, prm.a, prm.b, m.lambda).ok()?.ess.threshold())
        .reduce(f64::min);
    let numeric = NumericOut {
        bottom: aggregate.as_ref().and_then(|a| a.bottom),
        uncertainty: aggregate.as_ref().map_or(0.0, |a| a.uncertainty),
        count_stable: aggregate.as_ref().is_some_and(|a| a.count_stable),
    };
    let dev = match (numeric.bottom, predicted_bottom) {
        (Some(y), Some(x)) => Some(deviation(y, x)),
        _ => None,
    };
    let verdict = Verdict {
        pass: solver_errors == 0 && aggregate.as_ref().is_some_and(|a| a.pass),
        predicted_bottom,
        deviation: dev,
        solver_errors,
    };
    Ok(DegreeReport {
        params: ParamsOut {
            dim: prm.dim,
            p,
            a: prm.a,
            b: prm.b,
            epsilon: prm.epsilon,
            c: prm.c,
            kmax: config.kmax,
            ladder: config.ladder.clone(),
            cutoff: config.cutoff,
            tolerance: config.tolerance,
            grid: config.grid.clone(),
        },
        predicted: predict(prm.dim, p, prm.a, prm.b)?,
        numeric,
        regime: classify_regime(prm.dim, p, prm.a, prm.b, modes[0].lambda)?,
        verdict,
        modes: out,
    })
}

pub fn shared_map(config: &RunConfig) -> Result<Arc<ArclengthMap>> {
    Ok(Arc::new(arclength(&build_profile(config.params)?)?))
}

/// Writes `modes_p{p}.csv` and `report_p{p}.json` under the output directory.
pub fn write_outputs(config: &RunConfig, report: &DegreeReport) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(&config.out)?;
    let p = report.params.p;
    let csv = config.out.join(format!("modes_p{p}.csv"));
    let json = config.out.join(format!("report_p{p}.json"));
    std::fs::write(&csv, report.csv())?;
    let mut text = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(&json, text)?;
    Ok((csv, json))
}
