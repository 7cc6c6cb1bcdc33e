//! Python bindings: predictions, the metric, reduced potentials, the ladder
//! solver and the verifier.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::warpspec as core;
use core::eigensolver::{essential_bottom as ladder_bottom, GridPolicy, LadderConfig};
use core::reduction::{to_arclength, PotentialKind, ReducedOperator};
use core::verifier::{run_suite, Mutation};
use core::{arclength, build_profile, ArclengthMap, WarpParams};

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::InvalidParameter(_) | core::Error::Empty(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn kind(name: &str) -> PyResult<PotentialKind> {
    match name {
        "type1" | "I" => Ok(PotentialKind::TypeI),
        "type2" | "II" => Ok(PotentialKind::TypeII),
        other => Err(PyValueError::new_err(format!("unknown potential kind {other:?}, expected 'type1' or 'type2'"))),
    }
}

fn band<'py>(py: Python<'py>, b: core::predictor::Band) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("text", b.to_string())?;
    d.set_item("threshold", b.threshold())?;
    d.set_item("infimum", b.infimum())?;
    Ok(d)
}

/// Predicted essential, absolutely continuous and singular continuous spectrum.
#[pyfunction]
fn predict<'py>(py: Python<'py>, n: usize, p: usize, a: f64, b: f64) -> PyResult<Bound<'py, PyDict>> {
    let pr = core::predictor::predict(n, p, a, b).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("ess", band(py, pr.ess)?)?;
    d.set_item("ac", band(py, pr.ac)?)?;
    d.set_item("sc", serde_json::to_value(pr.sc).ok().and_then(|v| v.as_str().map(String::from)))?;
    d.set_item("case", pr.case)?;
    Ok(d)
}

/// `(mechanism, decay_exponent)` for the type I mode.
#[pyfunction]
fn classify_regime(n: usize, p: usize, a: f64, b: f64, lam: f64) -> PyResult<(String, Option<f64>)> {
    let r = core::predictor::classify_regime(n, p, a, b, lam).map_err(err)?;
    Ok((format!("{:?}", r.mechanism), r.decay_exponent))
}

#[pyfunction]
fn coclosed_eigenvalues(n: usize, p: usize, kmax: usize) -> PyResult<Vec<f64>> {
    Ok(core::sphere_modes::coclosed_eigenvalues(n, p, kmax).map_err(err)?.iter().map(|m| m.lambda).collect())
}

#[pyfunction]
fn closed_eigenvalues(n: usize, p: usize, kmax: usize) -> PyResult<Vec<f64>> {
    Ok(core::sphere_modes::closed_eigenvalues(n, p, kmax).map_err(err)?.iter().map(|m| m.lambda).collect())
}

/// Warped-product metric together with its arclength coordinate.
#[pyclass(frozen, module = "warpspec")]
struct Metric {
    map: Arc<ArclengthMap>,
}

#[pymethods]
impl Metric {
    #[new]
    #[pyo3(signature = (n, a, b, epsilon = 1.0, c = 2.0))]
    fn new(n: usize, a: f64, b: f64, epsilon: f64, c: f64) -> PyResult<Self> {
        let params = WarpParams::new(n, a, b, epsilon, c).map_err(err)?;
        let map = arclength(&build_profile(params).map_err(err)?).map_err(err)?;
        Ok(Self { map: Arc::new(map) })
    }

    fn f(&self, t: f64) -> f64 {
        self.map.profile().f(t)
    }

    fn g(&self, t: f64) -> f64 {
        self.map.profile().g(t)
    }

    fn r(&self, t: f64) -> PyResult<f64> {
        self.map.r(t).map_err(err)
    }

    fn t(&self, r: f64) -> PyResult<f64> {
        self.map.t(r).map_err(err)
    }

    #[getter]
    fn c_bar(&self) -> f64 {
        self.map.c_bar()
    }

    /// Reduced potential of kind `"type1"` or `"type2"` at arclength `r`.
    fn potential(&self, kind_name: &str, p: usize, lam: f64, r: f64) -> PyResult<f64> {
        match to_arclength(Arc::clone(&self.map), kind(kind_name)?, p, lam).map_err(err)? {
            ReducedOperator::Scalar(op) => op.potential(r).map_err(err),
            ReducedOperator::Coupled(_) => unreachable!("scalar kinds only"),
        }
    }

    /// Ladder estimate of where the band of one mode starts.
    #[pyo3(signature = (kind_name, p, lam, ladder = vec![40.0, 80.0, 160.0], cutoff = 50.0, min_nodes = 4096))]
    fn essential_bottom<'py>(
        &self,
        py: Python<'py>,
        kind_name: &str,
        p: usize,
        lam: f64,
        ladder: Vec<f64>,
        cutoff: f64,
        min_nodes: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let op = to_arclength(Arc::clone(&self.map), kind(kind_name)?, p, lam).map_err(err)?;
        let shortest = ladder.first().copied().unwrap_or(0.0);
        let eps = self.map.profile().params().epsilon;
        let config = GridPolicy::for_ladder(eps, shortest, min_nodes)
            .and_then(|policy| LadderConfig::new(ladder, policy, cutoff))
            .map_err(err)?;
        let est = py.detach(|| ladder_bottom(&op, &config)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("bottom", est.bottom)?;
        d.set_item("uncertainty", est.uncertainty)?;
        d.set_item("count_stable", est.count_stable)?;
        d.set_item("outcome", serde_json::to_value(est.outcome).ok().and_then(|v| v.as_str().map(String::from)))?;
        d.set_item("flagged", est.flagged)?;
        d.set_item("counts", est.levels.iter().map(|l| l.count_below_cutoff).collect::<Vec<_>>())?;
        Ok(d)
    }
}

/// Runs the reduction checks; returns `(passed, json_lines)`.
#[pyfunction]
#[pyo3(signature = (mutation = None))]
fn verify(py: Python<'_>, mutation: Option<&str>) -> PyResult<(bool, String)> {
    let m = match mutation {
        None => Mutation::None,
        Some("swap_coupling") => Mutation::SwapCoupling,
        Some("wrong_cross") => Mutation::WrongTypeIICross,
        Some(other) => return Err(PyValueError::new_err(format!("unknown mutation {other:?}"))),
    };
    let report = py.detach(|| run_suite(m)).map_err(err)?;
    Ok((report.passed(), report.json_lines()))
}

#[pymodule]
fn warpspec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(coclosed_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(closed_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_class::<Metric>()?;
    Ok(())
}
