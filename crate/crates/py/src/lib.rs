//! Python bindings for `ksubmax-core`.
//!
//! Structured results (runs, reports, suites) come back as plain dicts and
//! lists; core errors raise `ValueError`, or `GuardExceeded` when an
//! exhaustive computation is too large.

use ksubmax_core::bench::{self, ward_zivny_ratio};
use ksubmax_core::kernel::{self, probe_element, Assignment, Dims};
use ksubmax_core::lemma_lab::{self, AdversaryScenario};
use ksubmax_core::oracle::{
    self, BodyKind, GeneratorConfig, OracleSpec, ValidationMethod,
};
use ksubmax_core::solvers::{self, ElementOrder, ProbabilityRule, TailExponent};
use ksubmax_core::{CountingOracle, Error, MarginalVector};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(ksubmax, GuardExceeded, PyValueError, "An exhaustive computation exceeds the enumeration guard.");

enum BindError {
    Core(Error),
    Py(PyErr),
}

impl From<Error> for BindError {
    fn from(e: Error) -> Self {
        BindError::Core(e)
    }
}

impl From<PyErr> for BindError {
    fn from(e: PyErr) -> Self {
        BindError::Py(e)
    }
}

impl From<serde_json::Error> for BindError {
    fn from(e: serde_json::Error) -> Self {
        BindError::Core(e.into())
    }
}

impl From<BindError> for PyErr {
    fn from(e: BindError) -> Self {
        match e {
            BindError::Core(e) if e.is_guard() => GuardExceeded::new_err(e.to_string()),
            BindError::Core(e) => PyValueError::new_err(e.to_string()),
            BindError::Py(e) => e,
        }
    }
}

type Res<T> = Result<T, BindError>;

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> Res<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?)
}

fn order(shuffle: Option<u64>) -> ElementOrder {
    shuffle.map_or(ElementOrder::Given, ElementOrder::Shuffled)
}

fn labels(x: Assignment) -> Vec<usize> {
    x.labels().iter().map(|&l| l as usize).collect()
}

/// Labels as an assignment; `k` defaults to the largest label present.
fn assignment(labels: Vec<u8>) -> Res<Assignment> {
    let k = labels.iter().copied().max().unwrap_or(0).max(1) as usize;
    Ok(Assignment::new(Dims::new(labels.len(), k)?, labels)?)
}

/// Keeps a label only where both agree on it.
#[pyfunction]
fn meet(x: Vec<u8>, y: Vec<u8>) -> Res<Vec<usize>> {
    Ok(labels(kernel::meet(&assignment(x)?, &assignment(y)?)?))
}

/// Union of supports; conflicting labels cancel to 0.
#[pyfunction]
fn join(x: Vec<u8>, y: Vec<u8>) -> Res<Vec<usize>> {
    Ok(labels(kernel::join(&assignment(x)?, &assignment(y)?)?))
}

#[pyfunction]
fn precedes(x: Vec<u8>, y: Vec<u8>) -> Res<bool> {
    Ok(kernel::precedes(&assignment(x)?, &assignment(y)?)?)
}

/// A nonnegative k-submodular function on `{0, ..., k}^n`.
#[pyclass(name = "Oracle", module = "ksubmax", frozen, skip_from_py_object)]
struct PyOracle {
    spec: OracleSpec,
}

impl PyOracle {
    fn point(&self, x: Vec<u8>) -> Res<Assignment> {
        Ok(Assignment::new(self.spec.dims(), x)?)
    }
}

#[pymethods]
impl PyOracle {
    #[staticmethod]
    fn from_json(text: &str) -> Res<Self> {
        Ok(Self { spec: OracleSpec::from_json(text)? })
    }

    #[staticmethod]
    fn load(path: &str) -> Res<Self> {
        Ok(Self { spec: oracle::read_instance(path)? })
    }

    /// `f(x) = Σ weights[x_e - 1]` over assigned elements, one element per call.
    #[staticmethod]
    fn unary(weights: Vec<f64>) -> Res<Self> {
        Ok(Self { spec: OracleSpec::unary(weights)? })
    }

    /// Explicit values in base-(k+1) index order.
    #[staticmethod]
    fn table(n: usize, k: usize, values: Vec<f64>) -> Res<Self> {
        Ok(Self { spec: OracleSpec::table(Dims::new(n, k)?, values)? })
    }

    #[staticmethod]
    #[pyo3(signature = (k, n, seed, monotone = false, table = false))]
    fn generate(k: usize, n: usize, seed: u64, monotone: bool, table: bool) -> Res<Self> {
        let dims = Dims::new(n, k)?;
        let mut config = if monotone {
            GeneratorConfig::monotone(dims)
        } else {
            GeneratorConfig::nonmonotone(dims)
        };
        if table {
            config.body = BodyKind::Table;
        }
        Ok(Self { spec: oracle::generate(&config, seed)? })
    }

    fn to_json(&self) -> Res<String> {
        Ok(self.spec.to_json()?)
    }

    fn save(&self, path: &str) -> Res<()> {
        Ok(oracle::write_instance(path, &self.spec)?)
    }

    #[getter]
    fn n(&self) -> usize {
        self.spec.dims().n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.spec.dims().k()
    }

    fn value(&self, x: Vec<u8>) -> Res<f64> {
        Ok(self.spec.value(&self.point(x)?)?)
    }

    fn __call__(&self, x: Vec<u8>) -> Res<f64> {
        self.value(x)
    }

    fn tabulate(&self) -> Res<Vec<f64>> {
        Ok(self.spec.tabulate()?)
    }

    /// Gains of assigning each label to the unassigned element `e` of `x`.
    fn marginals(&self, x: Vec<u8>, e: usize) -> Res<Vec<f64>> {
        let mut o = &self.spec;
        Ok(probe_element(&mut o, &self.point(x)?, e, None)?.marginals().0)
    }

    /// `{"verdict": "ok"}` or a counterexample dict.
    #[pyo3(signature = (method = "characterization"))]
    fn validate<'py>(&self, py: Python<'py>, method: &str) -> Res<Bound<'py, PyAny>> {
        let method: ValidationMethod = method.parse().map_err(PyValueError::new_err)?;
        let report = py.detach(|| oracle::validate(&self.spec, method))?;
        to_py(py, &report)
    }

    fn is_monotone(&self) -> Res<bool> {
        Ok(oracle::is_monotone(&self.spec)?)
    }

    /// `(x, f(x))` for the lexicographically smallest maximizer.
    fn brute_force_opt(&self, py: Python<'_>) -> Res<(Vec<usize>, f64)> {
        let (x, v) = py.detach(|| solvers::brute_force_opt(&self.spec))?;
        Ok((labels(x), v))
    }

    #[pyo3(signature = (rule, shuffle = None))]
    fn exact_expected_value(&self, py: Python<'_>, rule: PyRule, shuffle: Option<u64>) -> Res<f64> {
        Ok(py.detach(|| solvers::exact_expected_value(&self.spec, rule.0, order(shuffle)))?)
    }

    /// One randomized run: `{"assignment", "value", "queries", "trace"}`.
    #[pyo3(signature = (rule, seed = 0, shuffle = None, trace = false))]
    fn run<'py>(
        &self,
        py: Python<'py>,
        rule: PyRule,
        seed: u64,
        shuffle: Option<u64>,
        trace: bool,
    ) -> Res<Bound<'py, PyAny>> {
        let mut counting = CountingOracle::new(&self.spec);
        let report = solvers::run_randomized(&mut counting, rule.0, seed, order(shuffle), trace)?;
        to_py(py, &report)
    }

    /// Step-by-step check of a run against a full-support `reference`.
    #[pyo3(signature = (rule, reference, seed = 0, shuffle = None))]
    fn trace_replay<'py>(
        &self,
        py: Python<'py>,
        rule: PyRule,
        reference: Vec<u8>,
        seed: u64,
        shuffle: Option<u64>,
    ) -> Res<Bound<'py, PyAny>> {
        let reference = self.point(reference)?;
        let report = lemma_lab::trace_against_reference(&self.spec, rule.0, &reference, seed, order(shuffle))?;
        let out = to_py(py, &report)?;
        out.set_item("ok", report.ok())?;
        Ok(out)
    }

    /// Fills unassigned elements with their best label.
    fn extend_to_full(&self, x: Vec<u8>) -> Res<Vec<usize>> {
        Ok(labels(lemma_lab::extend_to_full(&self.spec, &self.point(x)?)?))
    }

    fn __repr__(&self) -> String {
        format!("Oracle(n={}, k={})", self.n(), self.k())
    }
}

/// A per-step probability rule.
#[pyclass(name = "Rule", module = "ksubmax", frozen, from_py_object)]
#[derive(Clone)]
struct PyRule(ProbabilityRule);

#[pymethods]
impl PyRule {
    #[staticmethod]
    fn monotone() -> Self {
        Self(ProbabilityRule::Monotone)
    }

    #[staticmethod]
    fn k3() -> Self {
        Self(ProbabilityRule::KThree)
    }

    /// `tail` is `"k-2"` (default) or `"k-1"` for the tail-branch exponent.
    #[staticmethod]
    #[pyo3(signature = (eps, tail = "k-2"))]
    fn general(eps: f64, tail: &str) -> PyResult<Self> {
        let tail = match tail {
            "k-2" => TailExponent::KMinusTwo,
            "k-1" => TailExponent::KMinusOne,
            other => return Err(PyValueError::new_err(format!("unknown tail exponent {other:?}"))),
        };
        Ok(Self(ProbabilityRule::GeneralK { eps, tail }))
    }

    #[staticmethod]
    fn uniform() -> Self {
        Self(ProbabilityRule::Uniform)
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.0.name()
    }

    #[getter]
    fn eps(&self) -> Option<f64> {
        self.0.eps()
    }

    /// `(p, branch)` for the marginal vector `y`.
    fn distribution(&self, y: Vec<f64>) -> Res<(Vec<f64>, String)> {
        let (p, branch) = self.0.distribution(&MarginalVector(y))?;
        Ok((p.into_vec(), branch.to_string()))
    }

    fn check_compatible(&self, k: usize) -> Res<()> {
        Ok(self.0.check_compatible(k)?)
    }

    fn constant(&self, k: usize) -> Option<f64> {
        self.0.constant(k)
    }

    #[pyo3(signature = (k, monotone_instance = false))]
    fn guarantee(&self, k: usize, monotone_instance: bool) -> Option<f64> {
        self.0.guarantee(k, monotone_instance)
    }

    fn __repr__(&self) -> String {
        format!("Rule({})", self.0)
    }
}

#[pyfunction]
fn epsilon_default(k: usize) -> Res<f64> {
    Ok(solvers::epsilon_default(k)?)
}

#[pyfunction]
#[pyo3(signature = (k, tol = 1e-12))]
fn epsilon_max(k: usize, tol: f64) -> Res<f64> {
    Ok(solvers::epsilon_max(k, tol)?)
}

#[pyfunction]
fn implied_ratio(eps: f64) -> f64 {
    solvers::implied_ratio(eps)
}

/// `(q1, q2, q3)`; `eps` is feasible when all three are nonnegative.
#[pyfunction]
fn residuals_eps(k: usize, eps: f64) -> Res<(f64, f64, f64)> {
    let r = lemma_lab::residuals_eps(k, eps)?;
    Ok((r.q1, r.q2, r.q3))
}

#[pyfunction]
fn general_ratio(k: usize) -> f64 {
    solvers::general_ratio(k)
}

#[pyfunction]
fn monotone_ratio(k: usize) -> f64 {
    solvers::monotone_ratio(k)
}

#[pyfunction]
fn k3_ratio() -> f64 {
    solvers::k3_ratio()
}

#[pyfunction]
fn k3_constant() -> f64 {
    solvers::k3_constant()
}

#[pyfunction(name = "ward_zivny_ratio")]
fn ward_zivny(k: usize) -> f64 {
    ward_zivny_ratio(k)
}

/// Flowchart level for marginals sorted in descending order.
#[pyfunction]
fn flowchart_level(y_sorted: Vec<f64>, eps: f64) -> Res<usize> {
    Ok(solvers::flowchart_l(&y_sorted, eps)?)
}

/// `c·g(p) − f(p)` for one adversary scenario, with the branch taken.
#[pyfunction]
fn check_rule<'py>(
    py: Python<'py>,
    a: Vec<f64>,
    y: Vec<f64>,
    i_star: u8,
    rule: PyRule,
    c: f64,
) -> Res<Bound<'py, PyAny>> {
    let s = AdversaryScenario::new(a, y, i_star)?;
    to_py(py, &lemma_lab::check_rule(&s, rule.0, c)?)
}

/// Every residual suite, `count` scenarios each.
#[pyfunction]
#[pyo3(signature = (count = 10_000, seed = 0))]
fn lemma_suites<'py>(py: Python<'py>, count: u64, seed: u64) -> Res<Bound<'py, PyAny>> {
    let reports = py.detach(|| lemma_lab::standard_suites(count, seed))?;
    to_py(py, &reports)
}

#[pyfunction]
fn tightness_witness_k3<'py>(py: Python<'py>) -> Res<Bound<'py, PyAny>> {
    let r = lemma_lab::tightness_witness_k3()?;
    let out = to_py(py, &r)?;
    out.set_item("holds", r.holds())?;
    Ok(out)
}

/// Exact ratio records for every instance and rule, in input order.
#[pyfunction]
fn certify<'py>(
    py: Python<'py>,
    instances: Vec<PyRef<'py, PyOracle>>,
    rules: Vec<PyRule>,
) -> Res<Bound<'py, PyAny>> {
    let instances: Vec<(String, OracleSpec)> = instances
        .iter()
        .enumerate()
        .map(|(i, o)| (format!("instance_{i:04}"), o.spec.clone()))
        .collect();
    let rules: Vec<ProbabilityRule> = rules.into_iter().map(|r| r.0).collect();
    let records = py.detach(|| bench::certify(&instances, &rules))?;
    to_py(py, &records)
}

#[pyfunction]
#[pyo3(signature = (k_min = 3, k_max = 64))]
fn ratio_table<'py>(py: Python<'py>, k_min: usize, k_max: usize) -> Res<Bound<'py, PyAny>> {
    let rows = bench::ratio_table(k_min..=k_max, &Default::default())?;
    to_py(py, &rows)
}

#[pymodule]
fn ksubmax(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GuardExceeded", m.py().get_type::<GuardExceeded>())?;
    m.add_class::<PyOracle>()?;
    m.add_class::<PyRule>()?;
    m.add_function(wrap_pyfunction!(meet, m)?)?;
    m.add_function(wrap_pyfunction!(join, m)?)?;
    m.add_function(wrap_pyfunction!(precedes, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_default, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_max, m)?)?;
    m.add_function(wrap_pyfunction!(implied_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(residuals_eps, m)?)?;
    m.add_function(wrap_pyfunction!(general_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(monotone_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(k3_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(k3_constant, m)?)?;
    m.add_function(wrap_pyfunction!(ward_zivny, m)?)?;
    m.add_function(wrap_pyfunction!(flowchart_level, m)?)?;
    m.add_function(wrap_pyfunction!(check_rule, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_suites, m)?)?;
    m.add_function(wrap_pyfunction!(tightness_witness_k3, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_table, m)?)?;
    Ok(())
}
