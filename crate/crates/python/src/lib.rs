//! Python bindings: scenario parsing, integration, cross-checks, flux
//! quantization and identity verification.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use gaugeflow_core::scenario::{self, ScenarioConfig};
use gaugeflow_core::{quantization, Error, ErrorCategory};

fn to_py_err(e: Error) -> PyErr {
    match e.category() {
        ErrorCategory::Parse => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn config_from(text: Option<&str>, builtin: Option<&str>) -> PyResult<ScenarioConfig> {
    match (text, builtin) {
        (Some(t), None) => scenario::parse_config(t).map_err(|e| to_py_err(e.into())),
        (None, Some(n)) => scenario::builtin_config(n).map_err(to_py_err),
        _ => Err(PyValueError::new_err("pass exactly one of config or builtin")),
    }
}

fn value_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(value_to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(o) => {
            let dict = PyDict::new(py);
            for (k, x) in o {
                dict.set_item(k, value_to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn report_to_py<'py, T: serde::Serialize>(py: Python<'py>, r: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(r).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

/// Names of the built-in scenarios.
#[pyfunction]
fn builtin_names() -> Vec<&'static str> {
    scenario::builtin_names()
}

/// Config text of a built-in scenario.
#[pyfunction]
fn builtin_text(name: &str) -> PyResult<&'static str> {
    scenario::builtin_text(name).ok_or_else(|| PyValueError::new_err(format!("unknown builtin `{name}`")))
}

/// Parses config text and returns its canonical form.
#[pyfunction]
fn canonical_config(text: &str) -> PyResult<String> {
    Ok(config_from(Some(text), None)?.to_text())
}

/// Integrates a scenario. Returns a dict with `times`, `states`,
/// `hamiltonian_times`, `hamiltonian_states` (either pair may be None) and
/// `diagnostics`.
#[pyfunction]
#[pyo3(signature = (config=None, builtin=None))]
fn integrate<'py>(py: Python<'py>, config: Option<&str>, builtin: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let c = config_from(config, builtin)?;
    let system = scenario::build_system(&c).map_err(to_py_err)?;
    let (lag, ham, diag) = py
        .detach(|| scenario::simulate(&c, &system))
        .map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("times", lag.as_ref().map(|t| t.times.clone()))?;
    out.set_item("states", lag.map(|t| t.states))?;
    out.set_item("hamiltonian_times", ham.as_ref().map(|t| t.times.clone()))?;
    out.set_item("hamiltonian_states", ham.map(|t| t.states))?;
    out.set_item("diagnostics", report_to_py(py, &diag)?)?;
    Ok(out)
}

/// Lagrangian versus Hamiltonian cross-check report.
#[pyfunction]
#[pyo3(signature = (config=None, builtin=None, seed=0))]
fn crosscheck<'py>(py: Python<'py>, config: Option<&str>, builtin: Option<&str>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let c = config_from(config, builtin)?;
    let r = py.detach(|| scenario::crosscheck(&c, seed)).map_err(to_py_err)?;
    report_to_py(py, &r)
}

/// Flux quantization report.
#[pyfunction]
#[pyo3(signature = (config=None, builtin=None))]
fn quantize<'py>(py: Python<'py>, config: Option<&str>, builtin: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let c = config_from(config, builtin)?;
    let r = py.detach(|| scenario::quantize(&c)).map_err(to_py_err)?;
    report_to_py(py, &r)
}

/// Sampled identity table.
#[pyfunction]
#[pyo3(signature = (config=None, builtin=None, seed=0))]
fn verify_identities<'py>(py: Python<'py>, config: Option<&str>, builtin: Option<&str>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let c = config_from(config, builtin)?;
    let r = py.detach(|| scenario::verify_identities(&c, seed)).map_err(to_py_err)?;
    report_to_py(py, &r)
}

/// `q_e q_m ∈ ½ℤ`.
#[pyfunction]
fn dirac_condition(q_e: f64, q_m: f64) -> bool {
    quantization::dirac_condition(q_e, q_m)
}

#[pymodule]
fn gaugeflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(builtin_names, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_text, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_config, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(crosscheck, m)?)?;
    m.add_function(wrap_pyfunction!(quantize, m)?)?;
    m.add_function(wrap_pyfunction!(verify_identities, m)?)?;
    m.add_function(wrap_pyfunction!(dirac_condition, m)?)?;
    Ok(())
}
