// SPDX-License-Identifier: Apache-2.0

//! Python bindings: gadget families, instances, circuits and the checks.

use metareduce::circuit::{json, BitWord, CountingSink};
use metareduce::compile::{compile_det, compile_det_to, compile_nondet, compile_nondet_to};
use metareduce::glue::explicit_dynamics;
use metareduce::verify::{
    check_equivalence, digit_dynamics, instance_semantics, mso_check, rice_probe, two_automata_circuit,
    EnumerateOptions, MsoFormula, SemanticGraph, DEFAULT_MSO_BUDGET,
};
use metareduce::{GammaSpec, Mode, PropFormula, ReductionInstance, SizingMode};
use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: metareduce::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A validated gadget family.
#[pyclass(name = "Gamma", module = "pymetareduce", frozen)]
struct PyGamma {
    inner: GammaSpec,
}

#[pymethods]
impl PyGamma {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        GammaSpec::from_json(text).map(|inner| PyGamma { inner }).map_err(err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    #[getter]
    fn q(&self) -> u32 {
        self.inner.q()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }
}

/// A compiled circuit.
#[pyclass(name = "Circuit", module = "pymetareduce", frozen)]
struct PyCircuit {
    inner: metareduce::Circuit,
}

#[pymethods]
impl PyCircuit {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        json::deserialize(text.as_bytes())
            .map(|(inner, _)| PyCircuit { inner })
            .map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        String::from_utf8(json::serialize(&self.inner, None)).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn inputs(&self) -> usize {
        self.inner.input_count()
    }

    #[getter]
    fn outputs(&self) -> usize {
        self.inner.output_count()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Evaluates on the input word `value` (bit k is input k).
    fn evaluate(&self, value: BigUint) -> PyResult<BigUint> {
        let word = BitWord::from_biguint(&value, self.inner.input_count());
        self.inner.evaluate(&word).map(|w| w.to_biguint()).map_err(err)
    }
}

/// A gadget family, a formula and a sizing choice.
#[pyclass(name = "Instance", module = "pymetareduce", frozen)]
struct PyInstance {
    inner: ReductionInstance,
}

#[pymethods]
impl PyInstance {
    /// `padding=None` selects uniform sizing.
    #[new]
    #[pyo3(signature = (gamma, sat, mode = "det", padding = None))]
    fn new(gamma: &PyGamma, sat: &str, mode: &str, padding: Option<BigUint>) -> PyResult<Self> {
        let formula = PropFormula::parse(sat).map_err(err)?;
        let mode: Mode = mode.parse().map_err(err)?;
        let sizing = match padding {
            Some(l) => SizingMode::Free { l },
            None => SizingMode::Uniform,
        };
        ReductionInstance::new(gamma.inner.clone(), formula, sizing, mode)
            .map(|inner| PyInstance { inner })
            .map_err(err)
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode().as_str()
    }

    /// `{"s", "two_pow_s", "L", "T", "N"}`.
    fn params<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.sizes();
        let d = PyDict::new(py);
        d.set_item("s", s.s)?;
        d.set_item("two_pow_s", s.two_pow_s.clone())?;
        d.set_item("L", s.l.clone())?;
        d.set_item("T", s.total.clone())?;
        d.set_item("N", s.n)?;
        Ok(d)
    }

    fn compile(&self) -> PyResult<PyCircuit> {
        let inner = match self.inner.mode() {
            Mode::Deterministic => compile_det(&self.inner),
            Mode::NonDeterministic => compile_nondet(&self.inner),
        }
        .map_err(err)?;
        Ok(PyCircuit { inner })
    }

    /// Circuit JSON with the instance header.
    fn compile_json(&self) -> PyResult<String> {
        let c = self.compile()?;
        String::from_utf8(json::serialize(&c.inner, Some(&self.inner.meta())))
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Emission statistics as a JSON string.
    fn stats(&self) -> PyResult<String> {
        let stats = match self.inner.mode() {
            Mode::Deterministic => compile_det_to(&self.inner, CountingSink::default()),
            Mode::NonDeterministic => compile_nondet_to(&self.inner, CountingSink::default()),
        }
        .map_err(err)?
        .1;
        serde_json::to_string(&stats).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Arcs of the dynamics built by gluing.
    fn oracle_arcs(&self) -> PyResult<Vec<(usize, usize)>> {
        Ok(explicit_dynamics(&self.inner).map_err(err)?.arcs().collect())
    }

    fn oracle_dot(&self) -> PyResult<String> {
        Ok(explicit_dynamics(&self.inner).map_err(err)?.to_dot())
    }

    /// Arcs of the dynamics the compiled circuit encodes.
    #[pyo3(signature = (jobs = 1))]
    fn circuit_arcs(&self, py: Python<'_>, jobs: usize) -> PyResult<Vec<(usize, usize)>> {
        let opts = EnumerateOptions { jobs, bound: None };
        let (_, g) = py.detach(|| instance_semantics(&self.inner, opts)).map_err(err)?;
        Ok(g.arcs().collect())
    }

    /// True when the compiled circuit and the oracle agree exactly.
    #[pyo3(signature = (jobs = 1))]
    fn check(&self, py: Python<'_>, jobs: usize) -> PyResult<bool> {
        let opts = EnumerateOptions { jobs, bound: None };
        py.detach(|| {
            let (_, sem) = instance_semantics(&self.inner, opts)?;
            let oracle = explicit_dynamics(&self.inner)?;
            Ok(check_equivalence(&sem, &oracle)?.is_equivalent())
        })
        .map_err(err)
    }

    /// Rice probe report as a JSON string.
    #[pyo3(signature = (formula = "exists x (x -> x)"))]
    fn rice(&self, formula: &str) -> PyResult<String> {
        let phi = MsoFormula::parse(formula).map_err(err)?;
        let report = rice_probe(&self.inner, &phi, DEFAULT_MSO_BUDGET).map_err(err)?;
        serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// Model-checks `formula` on the digraph with `vertices` vertices and `arcs`.
#[pyfunction]
#[pyo3(signature = (vertices, arcs, formula, budget = DEFAULT_MSO_BUDGET))]
fn mso(vertices: usize, arcs: Vec<(usize, usize)>, formula: &str, budget: u128) -> PyResult<bool> {
    if let Some(&(u, v)) = arcs.iter().find(|&&(u, v)| u >= vertices || v >= vertices) {
        return Err(PyValueError::new_err(format!("arc ({u}, {v}) leaves the vertex range")));
    }
    let g = SemanticGraph::from_arcs(vertices, arcs);
    let phi = MsoFormula::parse(formula).map_err(err)?;
    Ok(mso_check(&g, &phi, budget).map_err(err)?.result)
}

/// Dynamics of the two three-state automata `F1(x) = x1`,
/// `F2(x) = (x2 mod 2) + 1`, vertex `3·x1 + x2`.
#[pyfunction]
fn two_automata_arcs() -> PyResult<Vec<(usize, usize)>> {
    let g = digit_dynamics(&two_automata_circuit(), 3, 2, 2).map_err(err)?;
    Ok(g.arcs().collect())
}

#[pymodule]
fn pymetareduce(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGamma>()?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(mso, m)?)?;
    m.add_function(wrap_pyfunction!(two_automata_arcs, m)?)?;
    Ok(())
}
