//! Python bindings. Frequencies are in rad/s and every function mirrors its
//! counterpart in the Rust library.

use fibgap::superbandgap::SbgCertificate;
use fibgap::validate::Suite;
use fibgap::{Error, FrequencyGrid, Letter, StackSpec};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn err(e: Error) -> PyErr {
    match e {
        Error::BeamPole { .. } | Error::DegenerateEntry { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn letter(label: &str) -> PyResult<Letter> {
    match label {
        "A" => Ok(Letter::A),
        "B" => Ok(Letter::B),
        other => Err(PyValueError::new_err(format!(
            "label must be 'A' or 'B', got '{other}'"
        ))),
    }
}

#[pyclass(name = "Mat2", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyMat2(fibgap::Mat2);

#[pymethods]
impl PyMat2 {
    #[new]
    fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        PyMat2(fibgap::Mat2::new(a11, a12, a21, a22))
    }

    fn trace(&self) -> f64 {
        self.0.trace()
    }

    fn det(&self) -> f64 {
        self.0.det()
    }

    fn unimodularity_error(&self) -> f64 {
        self.0.unimodularity_error()
    }

    fn pow(&self, p: u64) -> Self {
        PyMat2(self.0.pow(p))
    }

    #[allow(clippy::wrong_self_convention)]
    fn to_rows(&self) -> [[f64; 2]; 2] {
        self.0.to_rows()
    }

    fn __mul__(&self, other: &PyMat2) -> Self {
        PyMat2(self.0 * other.0)
    }

    fn __repr__(&self) -> String {
        let m = self.0;
        format!("Mat2([[{}, {}], [{}, {}]])", m.a11, m.a12, m.a21, m.a22)
    }
}

#[pyclass(name = "TilingRule", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyTilingRule(fibgap::TilingRule);

#[pymethods]
impl PyTilingRule {
    #[new]
    fn new(m: u32, l: u32) -> PyResult<Self> {
        fibgap::TilingRule::new(m, l).map(PyTilingRule).map_err(err)
    }

    #[staticmethod]
    fn golden() -> Self {
        PyTilingRule(fibgap::TilingRule::golden())
    }

    #[staticmethod]
    fn silver() -> Self {
        PyTilingRule(fibgap::TilingRule::silver())
    }

    #[staticmethod]
    fn bronze() -> Self {
        PyTilingRule(fibgap::TilingRule::bronze())
    }

    #[staticmethod]
    fn copper() -> Self {
        PyTilingRule(fibgap::TilingRule::copper())
    }

    #[getter]
    fn m(&self) -> u32 {
        self.0.m()
    }

    #[getter]
    fn l(&self) -> u32 {
        self.0.l()
    }

    fn fib_number(&self, n: usize) -> PyResult<u64> {
        self.0.fib_number(n).map_err(err)
    }

    fn word(&self, n: usize) -> PyResult<String> {
        self.0.word(n).map(|w| w.to_string()).map_err(err)
    }

    fn limit_ratio(&self) -> f64 {
        self.0.limit_ratio()
    }

    fn __repr__(&self) -> String {
        format!("TilingRule(m={}, l={})", self.0.m(), self.0.l())
    }
}

#[pyclass(name = "SystemSpec", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PySystemSpec(fibgap::SystemSpec);

#[pymethods]
impl PySystemSpec {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        fibgap::SystemSpec::from_json_str(text).map(PySystemSpec).map_err(err)
    }

    #[staticmethod]
    fn from_path(path: &str) -> PyResult<Self> {
        fibgap::SystemSpec::from_path(path).map(PySystemSpec).map_err(err)
    }

    #[staticmethod]
    fn mass_spring() -> Self {
        PySystemSpec(fibgap::presets::mass_spring())
    }

    #[staticmethod]
    fn canonical_rod() -> Self {
        PySystemSpec(fibgap::presets::canonical_rod())
    }

    #[staticmethod]
    fn rod_stack() -> Self {
        PySystemSpec(fibgap::presets::rod_stack())
    }

    #[staticmethod]
    fn beam() -> Self {
        PySystemSpec(fibgap::presets::beam())
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind_name()
    }

    #[allow(clippy::wrong_self_convention)]
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn element_matrix(&self, label: &str, omega: f64) -> PyResult<PyMat2> {
        self.0.element_matrix(letter(label)?, omega).map(PyMat2).map_err(err)
    }

    fn normalised_frequency(&self, omega: f64) -> f64 {
        self.0.normalised_frequency(omega)
    }

    fn __repr__(&self) -> String {
        format!("SystemSpec({})", serde_json::to_string(&self.0).unwrap_or_default())
    }
}

/// `(xs, ts, escaped_at)` for `x_0 ..= x_{n_max}`.
#[pyfunction]
fn trace_sequence(
    spec: &PySystemSpec,
    rule: &PyTilingRule,
    omega: f64,
    n_max: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, Option<usize>)> {
    let seq = fibgap::trace_sequence(&spec.0, rule.0, omega, n_max).map_err(err)?;
    Ok((seq.xs, seq.ts, seq.escaped_at))
}

fn cert_tuple(c: SbgCertificate) -> (usize, [f64; 3]) {
    (c.order, c.seed_values)
}

/// `None`, or `(certifying order, (x_k, x_{k+1}, x_{k+2}))`.
#[pyfunction]
fn membership(spec: &PySystemSpec, rule: &PyTilingRule, omega: f64, n: usize) -> PyResult<Option<(usize, [f64; 3])>> {
    Ok(fibgap::membership(&spec.0, rule.0, omega, n)
        .map_err(err)?
        .map(cert_tuple))
}

fn grid(omega_min: f64, omega_max: f64, points: usize) -> PyResult<FrequencyGrid> {
    FrequencyGrid::new(omega_min, omega_max, points).map_err(err)
}

/// Certified `S_order` intervals `(omega_lo, omega_hi)` on a uniform grid.
#[pyfunction]
fn sweep(
    spec: &PySystemSpec,
    rule: &PyTilingRule,
    omega_min: f64,
    omega_max: f64,
    points: usize,
    order: usize,
) -> PyResult<Vec<(f64, f64)>> {
    let g = grid(omega_min, omega_max, points)?;
    let report = fibgap::sweep(&spec.0, rule.0, &g, order).map_err(err)?;
    Ok(report.intervals.iter().map(|iv| (iv.omega_lo, iv.omega_hi)).collect())
}

#[pyfunction]
fn passbands(
    spec: &PySystemSpec,
    rule: &PyTilingRule,
    n: usize,
    omega_min: f64,
    omega_max: f64,
    points: usize,
) -> PyResult<Vec<(f64, f64)>> {
    let g = grid(omega_min, omega_max, points)?;
    let bands = fibgap::passbands(&spec.0, rule.0, n, &g).map_err(err)?;
    Ok(bands.iter().map(|b| (b.omega_lo, b.omega_hi)).collect())
}

/// `(omega, T_c, log10|T_c|, flag)` rows for a stack such as `"quasicrystal:0..6"`.
#[pyfunction]
fn transmission(
    spec: &PySystemSpec,
    rule: &PyTilingRule,
    stack: &str,
    omega_min: f64,
    omega_max: f64,
    points: usize,
) -> PyResult<Vec<(f64, f64, f64, String)>> {
    let stack = stack
        .parse::<StackSpec>()
        .and_then(|s| s.build(rule.0, spec.0))
        .map_err(err)?;
    let g = grid(omega_min, omega_max, points)?;
    let profile = fibgap::transmission_profile(&stack, &g).map_err(err)?;
    Ok(profile
        .values
        .iter()
        .map(|v| {
            let flag = serde_json::to_value(v.flag)
                .ok()
                .and_then(|f| f.as_str().map(String::from))
                .unwrap_or_default();
            (v.omega, v.t_c, v.log10_abs_tc, flag)
        })
        .collect())
}

/// Runs a consistency suite; returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = 42))]
fn validate(suite: &str, seed: u64) -> PyResult<String> {
    let suite: Suite = suite.parse().map_err(err)?;
    let report = fibgap::validate::validate(suite, seed).map_err(err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
#[pyo3(name = "fibgap")]
fn fibgap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMat2>()?;
    m.add_class::<PyTilingRule>()?;
    m.add_class::<PySystemSpec>()?;
    m.add_function(wrap_pyfunction!(trace_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(membership, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(passbands, m)?)?;
    m.add_function(wrap_pyfunction!(transmission, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
