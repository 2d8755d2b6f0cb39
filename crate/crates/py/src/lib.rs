//! Python bindings. Structured results come back as plain dicts and lists.

use onticlab::builders::resolve_builder;
use onticlab::construction::{
    build_construction, build_restricted_protocol, scan_feasibility, verify_condition, HardyConstruction,
};
use onticlab::interfero::{detector_probabilities, Figure, Phase};
use onticlab::nogo::{
    check_trace, check_witness, derive_nonoverlap, Axiom, DerivationRequest, FeasibilityProblem, ProofTrace,
    SearchOutcome,
};
use onticlab::ontology::{
    check_ontic_indifference, check_possibilistic_completeness, classify_model, IndifferenceMode, OntologicalModel,
};
use onticlab::scenario::{zero_structure, QuantumScenario};
use onticlab::toymodels::{martin_spekkens_mzi, spekkens_toy_bit};
use onticlab::{CVector, Tolerances};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn mode(name: &str) -> PyResult<IndifferenceMode> {
    match name {
        "pointwise" => Ok(IndifferenceMode::Pointwise),
        "set-preserving" => Ok(IndifferenceMode::SetPreservingOnly),
        other => Err(err(format!("unknown indifference mode `{other}`"))),
    }
}

#[pyclass(name = "Scenario", module = "onticlab_py", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: QuantumScenario,
    pair: Option<(String, String, Option<String>)>,
}

#[pymethods]
impl PyScenario {
    /// Named instance: `mzi-fig1` … `mzi-fig4`, `toybit`, `construction[:a2:N]`, `restricted[:a2:N]`.
    #[staticmethod]
    fn from_builder(tag: &str) -> PyResult<Self> {
        let i = resolve_builder(tag, &tol()).map_err(err)?;
        Ok(PyScenario { inner: i.scenario, pair: Some((i.phi, i.psi, i.zero_state)) })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = QuantumScenario::from_json_str(text, &tol()).map_err(err)?;
        Ok(PyScenario { inner, pair: None })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner.to_json_value()).map_err(err)
    }

    /// `(phi, psi, zero_state)` for builder instances.
    #[getter]
    fn pair(&self) -> Option<(String, String, Option<String>)> {
        self.pair.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn preparations(&self) -> Vec<String> {
        self.inner.preparations().keys().cloned().collect()
    }

    #[getter]
    fn members(&self) -> Vec<String> {
        self.inner.member_ids()
    }

    #[getter]
    fn measurements(&self) -> Vec<String> {
        self.inner.measurements().keys().cloned().collect()
    }

    fn evaluate(&self, preparation: &str, member: &str, measurement: &str) -> PyResult<Vec<(String, f64)>> {
        self.inner.evaluate(preparation, member, measurement, &tol()).map_err(err)
    }

    fn zero_structure<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &zero_structure(&self.inner, &tol()).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(dim={}, preparations={}, members={})",
            self.inner.dim(),
            self.inner.preparations().len(),
            self.inner.member_ids().len()
        )
    }
}

#[pyclass(name = "Construction", module = "onticlab_py", from_py_object)]
#[derive(Clone)]
struct PyConstruction {
    inner: HardyConstruction,
}

#[pymethods]
impl PyConstruction {
    #[new]
    fn new(alpha2: f64, n: usize) -> PyResult<Self> {
        if !(alpha2 > 0.0 && alpha2 < 1.0) {
            return Err(err(format!("alpha2 must lie in (0, 1), got {alpha2}")));
        }
        let inner = build_construction(alpha2.sqrt(), (1.0 - alpha2).sqrt(), n, &tol()).map_err(err)?;
        Ok(PyConstruction { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyConstruction { inner: serde_json::from_str(text).map_err(err)? })
    }

    #[getter(M)]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter(N)]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    fn certificate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &verify_condition(&self.inner, &tol()).map_err(err)?)
    }

    fn audit<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.audit())
    }

    /// Deviations of the conjugated protocol: `(composite, zero_state)`.
    fn restricted_deviations(&self) -> PyResult<(f64, f64)> {
        let c = &self.inner;
        let p = build_restricted_protocol(&c.a0, &CVector::basis(c.dim(), 0), c, &tol()).map_err(err)?;
        Ok((p.composite_deviation(c), p.zero_state_deviation()))
    }

    fn to_scenario(&self) -> PyResult<PyScenario> {
        let inner = self.inner.to_scenario(&tol()).map_err(err)?;
        Ok(PyScenario { inner, pair: Some(("phi".into(), "psi".into(), None)) })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Construction(alpha2={}, N={}, M={})", self.inner.alpha.powi(2), self.inner.n, self.inner.m)
    }
}

#[pyclass(name = "Model", module = "onticlab_py", from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: OntologicalModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let (inner, _) = OntologicalModel::from_json_str(text, &tol()).map_err(err)?;
        Ok(PyModel { inner })
    }

    /// The toy bit model together with its qubit scenario.
    #[staticmethod]
    fn toybit() -> (Self, PyScenario) {
        let t = spekkens_toy_bit();
        let scenario = PyScenario { inner: t.scenario(&tol()), pair: None };
        (PyModel { inner: t.model }, scenario)
    }

    /// The field-path interferometer model together with its scenario.
    #[staticmethod]
    fn field_mzi() -> (Self, PyScenario) {
        let f = martin_spekkens_mzi();
        let scenario = PyScenario { inner: f.scenario(&tol()), pair: None };
        (PyModel { inner: f.model }, scenario)
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.space().labels().to_vec()
    }

    fn support(&self, preparation: &str) -> PyResult<Vec<String>> {
        let s = self.inner.support(preparation).map_err(err)?;
        Ok(self.inner.space().labels_of(&s))
    }

    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &classify_model(&self.inner))
    }

    fn completeness<'py>(&self, py: Python<'py>, scenario: &PyScenario) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &check_possibilistic_completeness(&self.inner, &scenario.inner, &tol()).map_err(err)?)
    }

    #[pyo3(signature = (scenario, member, preparation, mode = "pointwise"))]
    fn indifference<'py>(
        &self,
        py: Python<'py>,
        scenario: &PyScenario,
        member: &str,
        preparation: &str,
        mode: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let m = self::mode(mode)?;
        let v = check_ontic_indifference(&self.inner, &scenario.inner, member, preparation, m, &tol()).map_err(err)?;
        to_py(py, &v)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner.to_doc()).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Model(states={})", self.inner.space().size())
    }
}

type Table = Vec<(String, f64)>;

/// Detector probabilities for `phi` and `psi` at the given figure and phase (`"0"` or `"pi"`).
#[pyfunction]
#[pyo3(signature = (figure, phase = "0", alpha2 = None))]
fn mzi_probabilities(figure: u8, phase: &str, alpha2: Option<f64>) -> PyResult<Vec<(String, Table)>> {
    let phase = match phase {
        "0" => Phase::Zero,
        "pi" => Phase::Pi,
        other => return Err(err(format!("phase must be `0` or `pi`, got `{other}`"))),
    };
    let config = Figure::from_number(figure).and_then(|f| f.config(alpha2, phase)).map_err(err)?;
    ["phi", "psi"]
        .into_iter()
        .map(|p| Ok((p.to_owned(), detector_probabilities(&config, p, &tol()).map_err(err)?)))
        .collect()
}

/// Derives non-overlap of `phi` and `psi`; returns the trace as a dict.
#[pyfunction]
#[pyo3(signature = (scenario, phi, psi, measurement = None, zero_state = None))]
fn derive_trace<'py>(
    py: Python<'py>,
    scenario: &PyScenario,
    phi: &str,
    psi: &str,
    measurement: Option<String>,
    zero_state: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut req = DerivationRequest::new(phi, psi);
    req.measurement = measurement;
    if let Some(z) = zero_state {
        req = req.restricted(z);
    }
    to_py(py, &derive_nonoverlap(&scenario.inner, &req, &tol()).map_err(err)?)
}

/// Checks a trace given as JSON text. Returns `{"ok": True, ...}` or
/// `{"ok": False, "failure": {...}}`.
#[pyfunction]
fn verify_trace<'py>(py: Python<'py>, scenario: &PyScenario, trace: &str) -> PyResult<Bound<'py, PyAny>> {
    let t: ProofTrace = serde_json::from_str(trace).map_err(err)?;
    let report = match check_trace(&t, &scenario.inner, &tol()).map_err(err)? {
        Ok(v) => serde_json::json!({ "ok": true, "steps": v.steps, "first": v.first, "second": v.second }),
        Err(f) => serde_json::json!({ "ok": false, "failure": f }),
    };
    to_py(py, &report)
}

/// Bounded search for a model with at most `k` ontic states.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (scenario, phi, psi, k, axioms = None, mode = "pointwise", require_overlap = true))]
fn feasibility_search<'py>(
    py: Python<'py>,
    scenario: &PyScenario,
    phi: &str,
    psi: &str,
    k: usize,
    axioms: Option<Vec<String>>,
    mode: &str,
    require_overlap: bool,
) -> PyResult<(Bound<'py, PyAny>, Option<PyModel>)> {
    let mut p = FeasibilityProblem::new(scenario.inner.clone(), phi, psi, k)
        .mode(self::mode(mode)?)
        .overlap_required(require_overlap);
    if let Some(names) = axioms {
        let parsed: Vec<Axiom> = names.iter().map(|a| a.parse::<Axiom>().map_err(err)).collect::<PyResult<_>>()?;
        p = p.with_axioms(parsed);
    }
    let out = onticlab::nogo::feasibility_search(&p, &tol()).map_err(err)?;
    match out {
        SearchOutcome::Sat(sat) => {
            let check = check_witness(&p, &sat.witness, &tol()).map_err(err)?;
            let report = serde_json::json!({
                "verdict": "sat",
                "states": sat.states,
                "explored": sat.explored,
                "notes": sat.notes,
                "witness_check": check,
            });
            Ok((to_py(py, &report)?, Some(PyModel { inner: sat.witness })))
        }
        SearchOutcome::Unsat(u) => {
            let mut v = serde_json::to_value(&u).map_err(err)?;
            v["verdict"] = "unsat".into();
            Ok((to_py(py, &v)?, None))
        }
    }
}

/// Feasibility of the construction over a grid of `N` and `alpha2`.
#[pyfunction]
fn scan<'py>(py: Python<'py>, ns: Vec<usize>, alpha2: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &scan_feasibility(&ns, &alpha2, &tol()))
}

#[pymodule]
fn onticlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyConstruction>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(mzi_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(derive_trace, m)?)?;
    m.add_function(wrap_pyfunction!(verify_trace, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility_search, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_round_trip() {
        Python::initialize();
        Python::attach(|py| {
            let c = PyConstruction::new(0.5, 2).unwrap();
            assert_eq!(c.m(), 2);
            let cert = c.certificate(py).unwrap();
            assert_eq!(cert.get_item("per_n").unwrap().len().unwrap(), 3);
            assert!(PyConstruction::new(0.7, 3).is_err());
            let s = PyScenario::from_builder("mzi-fig2").unwrap();
            let back = PyScenario::from_json(&s.to_json().unwrap()).unwrap();
            assert_eq!(back.inner, s.inner);
            let (report, witness) = feasibility_search(py, &s, "phi", "psi", 3, None, "pointwise", true).unwrap();
            assert_eq!(report.get_item("verdict").unwrap().extract::<String>().unwrap(), "unsat");
            assert!(witness.is_none());
        });
    }
}
