//! Python bindings: parameters, the effective model, the fidelity optimizer,
//! the cooling rate and full master-equation runs.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;

use cavity_transfer::cooling::{extraction_rate as core_extraction_rate, CoolingEnsemble, ValidityPolicy};
use cavity_transfer::effective::{self, Damping};
use cavity_transfer::hilbert::BasisSpec;
use cavity_transfer::optimizer;
use cavity_transfer::scenario::{self, Overrides, RunOutput};
use cavity_transfer::transfer::{self, TransferOptions};
use cavity_transfer::{dynamics, Error};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::StepSizeUnderflow { .. } | Error::TruncationSuspect { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        serde_json::Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any().unbind(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any().unbind(),
            _ => py.None(),
        },
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

/// Converts any serializable value into nested Python dicts and lists.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// System parameters in a common frequency unit.
#[pyclass(name = "SystemParams", from_py_object)]
#[derive(Clone, Copy)]
struct PySystemParams {
    inner: cavity_transfer::SystemParams,
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (*, g1, g2, delta1, delta2, kappa, n_th, gamma, gamma_c))]
    #[allow(clippy::too_many_arguments)]
    fn new(g1: f64, g2: f64, delta1: f64, delta2: f64, kappa: f64, n_th: f64, gamma: f64, gamma_c: f64) -> PyResult<Self> {
        let inner = cavity_transfer::SystemParams { g1, g2, delta1, delta2, kappa, n_th, gamma, gamma_c };
        inner.validate().map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// Detunings placed symmetrically about `delta_mean` on the n = 0 resonance.
    #[staticmethod]
    #[pyo3(signature = (*, g1, g2, delta_mean, kappa, n_th, gamma, gamma_c))]
    #[allow(clippy::too_many_arguments)]
    fn resonant(g1: f64, g2: f64, delta_mean: f64, kappa: f64, n_th: f64, gamma: f64, gamma_c: f64) -> PyResult<Self> {
        let (delta1, delta2) = optimizer::resonant_detunings_about_mean(g1, g2, delta_mean).map_err(to_py_err)?;
        Self::new(g1, g2, delta1, delta2, kappa, n_th, gamma, gamma_c)
    }

    #[getter]
    fn g1(&self) -> f64 {
        self.inner.g1
    }
    #[getter]
    fn g2(&self) -> f64 {
        self.inner.g2
    }
    #[getter]
    fn delta1(&self) -> f64 {
        self.inner.delta1
    }
    #[getter]
    fn delta2(&self) -> f64 {
        self.inner.delta2
    }
    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }
    #[getter]
    fn n_th(&self) -> f64 {
        self.inner.n_th
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[getter]
    fn gamma_c(&self) -> f64 {
        self.inner.gamma_c
    }

    #[allow(clippy::wrong_self_convention)] // Python methods take the object by reference
    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "SystemParams(g1={}, g2={}, delta1={}, delta2={}, kappa={}, n_th={}, gamma={}, gamma_c={})",
            p.g1, p.g2, p.delta1, p.delta2, p.kappa, p.n_th, p.gamma, p.gamma_c
        )
    }
}

/// `t_tr = π / (2 |G(0)|)`.
#[pyfunction]
fn transfer_time(params: &PySystemParams) -> PyResult<f64> {
    effective::transfer_time(&params.inner).map_err(to_py_err)
}

/// Per-photon-number Stark energies, couplings and mismatch.
#[pyfunction]
fn effective_couplings(py: Python<'_>, params: &PySystemParams, n: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &effective::effective_couplings(&params.inner, n).map_err(to_py_err)?)
}

/// `n̄_eff = n̄_th κ / (κ + γ_c)`.
#[pyfunction]
fn effective_photon_number(kappa: f64, n_th: f64, gamma_c: f64) -> PyResult<f64> {
    effective::effective_photon_number(kappa, n_th, gamma_c).map_err(to_py_err)
}

/// Stationary photon distribution of the cooled cavity on `0..=n_max`.
#[pyfunction]
fn field_steady_state(kappa: f64, n_th: f64, gamma_c: f64, n_max: usize) -> PyResult<Vec<f64>> {
    dynamics::field_steady_state(kappa, n_th, gamma_c, n_max).map_err(to_py_err)
}

/// Thermally averaged effective-model transfer probability at each time.
#[pyfunction]
#[pyo3(signature = (params, times, photon_distribution, damped = false))]
fn transfer_curve(params: &PySystemParams, times: Vec<f64>, photon_distribution: Vec<f64>, damped: bool) -> PyResult<Vec<f64>> {
    let damping = if damped { Damping::CavityInduced } else { Damping::None };
    effective::transfer_curve(&params.inner, &times, &photon_distribution, damping).map_err(to_py_err)
}

/// Fidelity-bound terms, additive infidelity and regime checks.
#[pyfunction]
fn fidelity_budget(py: Python<'_>, params: &PySystemParams) -> PyResult<Py<PyAny>> {
    to_py(py, &optimizer::fidelity_budget(&params.inner).map_err(to_py_err)?)
}

/// Closed-form optimal detuning and extraction rate.
#[pyfunction]
fn optimal_extraction(py: Python<'_>, g1: f64, g2: f64, gamma: f64, kappa: f64, n_th: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &optimizer::optimal_extraction(g1, g2, gamma, kappa, n_th).map_err(to_py_err)?)
}

/// Extraction rate of a cooling ensemble with its validity checks.
#[pyfunction]
#[pyo3(signature = (*, n_c, omega, g_c, delta_c, gamma_r = None, omega_r = None, gamma_e = None, enforce = true))]
#[allow(clippy::too_many_arguments)]
fn extraction_rate(
    py: Python<'_>,
    n_c: f64,
    omega: f64,
    g_c: f64,
    delta_c: f64,
    gamma_r: Option<f64>,
    omega_r: Option<f64>,
    gamma_e: Option<f64>,
    enforce: bool,
) -> PyResult<Py<PyAny>> {
    let ens = CoolingEnsemble { n_c, omega, g_c, delta_c, gamma_r, omega_r, gamma_e, laser_ionization: false };
    let policy = if enforce { ValidityPolicy::Enforce } else { ValidityPolicy::Override };
    to_py(py, &core_extraction_rate(&ens, policy).map_err(to_py_err)?)
}

/// Full master-equation run of `|ba>` ⊗ the cooled field on a uniform grid.
///
/// Returns `{"t": [...], "p_ba": [...], "p_ab": [...], "p_s": [...], "n_photon": [...], "trace": [...], "n_max": int}`.
#[pyfunction]
#[pyo3(signature = (params, t_final, samples, n_max = None, strict = false))]
fn simulate_transfer(
    py: Python<'_>,
    params: &PySystemParams,
    t_final: f64,
    samples: usize,
    n_max: Option<usize>,
    strict: bool,
) -> PyResult<Py<PyAny>> {
    let p = params.inner;
    let basis = match n_max {
        Some(n) => BasisSpec::new(n).map_err(to_py_err)?,
        None => transfer::default_basis(&p),
    };
    let times = transfer::uniform_grid(t_final, samples);
    let options = TransferOptions { strict, ..Default::default() };
    let run = py.detach(|| transfer::simulate_transfer(&p, &basis, &times, &options)).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("t", times)?;
    for (name, values) in &run.series.columns {
        dict.set_item(name, values.clone())?;
    }
    dict.set_item("n_max", basis.n_max())?;
    Ok(dict.into_any().unbind())
}

fn output_to_py(py: Python<'_>, out: &RunOutput) -> PyResult<Py<PyAny>> {
    let dict = PyDict::new(py);
    dict.set_item("name", &out.scenario.name)?;
    let scale = out.scenario.time_scale();
    dict.set_item("t", out.times.iter().map(|t| t * scale).collect::<Vec<_>>())?;
    let columns = PyDict::new(py);
    for (name, values) in &out.columns {
        columns.set_item(name, values.clone())?;
    }
    dict.set_item("columns", columns)?;
    dict.set_item("photon_sim", out.photon_sim.clone())?;
    dict.set_item("photon_analytic", out.photon_analytic.clone())?;
    dict.set_item("report", to_py(py, &out.report)?)?;
    Ok(dict.into_any().unbind())
}

fn run_all(py: Python<'_>, scenarios: Vec<scenario::Scenario>, certify: bool) -> PyResult<Py<PyAny>> {
    let outputs = py.detach(|| {
        scenarios
            .iter()
            .map(|s| if certify { scenario::certify(s) } else { scenario::run_scenario(s) })
            .collect::<Result<Vec<_>, _>>()
    });
    let list = PyList::empty(py);
    for out in outputs.map_err(to_py_err)? {
        list.append(output_to_py(py, &out)?)?;
    }
    Ok(list.into_any().unbind())
}

fn overrides(n_max: Option<usize>, strict: bool, gamma_c_ratio: Option<f64>) -> Overrides {
    Overrides { n_max, strict, gamma_c_ratio, g2_rad_s: None }
}

/// Runs a built-in preset (every sweep member) and returns one dict per run.
#[pyfunction]
#[pyo3(signature = (name, n_max = None, strict = false, gamma_c_ratio = None, certify = false))]
fn run_preset(
    py: Python<'_>,
    name: &str,
    n_max: Option<usize>,
    strict: bool,
    gamma_c_ratio: Option<f64>,
    certify: bool,
) -> PyResult<Py<PyAny>> {
    let scenarios = scenario::preset(name, &overrides(n_max, strict, gamma_c_ratio)).map_err(to_py_err)?;
    run_all(py, scenarios, certify)
}

/// Runs a scenario given as TOML text.
#[pyfunction]
#[pyo3(signature = (text, n_max = None, strict = false, gamma_c_ratio = None, certify = false))]
fn run_scenario_toml(
    py: Python<'_>,
    text: &str,
    n_max: Option<usize>,
    strict: bool,
    gamma_c_ratio: Option<f64>,
    certify: bool,
) -> PyResult<Py<PyAny>> {
    let scenarios = scenario::parse_scenarios(text, &overrides(n_max, strict, gamma_c_ratio)).map_err(to_py_err)?;
    run_all(py, scenarios, certify)
}

/// Names of the built-in presets.
#[pyfunction]
fn list_presets() -> Vec<&'static str> {
    scenario::preset_names().collect()
}

#[pymodule]
fn cavity_transfer_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_function(wrap_pyfunction!(transfer_time, m)?)?;
    m.add_function(wrap_pyfunction!(effective_couplings, m)?)?;
    m.add_function(wrap_pyfunction!(effective_photon_number, m)?)?;
    m.add_function(wrap_pyfunction!(field_steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_curve, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_budget, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_extraction, m)?)?;
    m.add_function(wrap_pyfunction!(extraction_rate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario_toml, m)?)?;
    m.add_function(wrap_pyfunction!(list_presets, m)?)?;
    Ok(())
}
