//! Python bindings for the adversarium workbench.
//!
//! Matrices cross the boundary as lists of rows, inputs as lists of symbols.
//! Randomised runs take an explicit seed.

use std::fmt::Display;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use adversarium::adversary::{self as adv, AdversaryMatrix};
use adversarium::dual_adversary::{self as dual, DualAdversarySolution};
use adversarium::electric_walks::{self as ew, WeightedGraph};
use adversarium::functions::{self as fns, CertificateStructure, Family, PartialFunction};
use adversarium::learning_graphs::{self as lgs, DualLGCertificate, Flow, LearningGraph};
use adversarium::numerics::Mat;
use adversarium::quantum_sim::{self as qs, seeded_rng, WalkConstants};
use adversarium::span_programs::{self as sp, SpanProgram};

fn err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_mat(rows: &[Vec<f64>]) -> PyResult<Mat> {
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != c) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(Mat::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// A partial function on `[q]^n`, given by its domain and values.
#[pyclass(name = "Function", module = "adversarium")]
#[derive(Clone)]
struct PyFunction {
    inner: PartialFunction,
}

#[pymethods]
impl PyFunction {
    #[new]
    #[pyo3(signature = (n, domain, values, q=2))]
    fn new(n: usize, domain: Vec<Vec<u8>>, values: Vec<bool>, q: usize) -> PyResult<Self> {
        Ok(PyFunction { inner: PartialFunction::new(n, q, domain, values).map_err(err)? })
    }

    /// A named family: threshold, or, and, parity, ambainis, ed, k-distinctness,
    /// k-sum, collision, set-equality, promise-threshold or triangle.
    #[staticmethod]
    #[pyo3(signature = (name, n=None, k=None, q=2, d=None, vertices=None))]
    fn named(name: &str, n: Option<usize>, k: Option<usize>, q: usize, d: Option<usize>, vertices: Option<usize>) -> PyResult<Self> {
        let need = |v: Option<usize>, what: &str| v.ok_or_else(|| PyValueError::new_err(format!("{name} needs {what}")));
        let family = match name {
            "threshold" => Family::Threshold { k: need(k, "k")?, n: need(n, "n")? },
            "or" => Family::Or { n: need(n, "n")? },
            "and" => Family::And { n: need(n, "n")? },
            "parity" => Family::Parity { n: need(n, "n")? },
            "ambainis" => Family::Ambainis,
            "ed" | "element-distinctness" => Family::ElementDistinctness { n: need(n, "n")?, q },
            "k-distinctness" => Family::KDistinctness { k: need(k, "k")?, n: need(n, "n")?, q },
            "k-sum" => Family::KSum { k: need(k, "k")?, n: need(n, "n")?, q },
            "collision" => Family::Collision { n: need(n, "n")?, q },
            "set-equality" => Family::SetEquality { m: need(n, "n")?, q },
            "promise-threshold" => Family::PromiseThreshold { n: need(n, "n")?, k: need(k, "k")?, d: need(d, "d")? },
            "triangle" => Family::Triangle { vertices: need(vertices, "vertices")? },
            other => return Err(PyValueError::new_err(format!("unknown function {other:?}"))),
        };
        Ok(PyFunction { inner: fns::make_named(&family).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyFunction { inner: PartialFunction::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (text, q=None))]
    fn from_csv(text: &str, q: Option<usize>) -> PyResult<Self> {
        Ok(PyFunction { inner: PartialFunction::from_csv(text, q).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q
    }

    #[getter]
    fn domain(&self) -> Vec<Vec<u8>> {
        self.inner.domain.clone()
    }

    #[getter]
    fn values(&self) -> Vec<bool> {
        self.inner.values.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `None` outside the domain.
    fn value(&self, z: Vec<u8>) -> Option<bool> {
        self.inner.value(&z)
    }

    /// Variables of a smallest certificate, as a sorted list.
    fn minimal_certificate(&self, z: Vec<u8>) -> PyResult<Vec<usize>> {
        let i = self.inner.index_of(&z).ok_or_else(|| PyValueError::new_err("input outside the domain"))?;
        let s = fns::minimal_certificate(&self.inner, i);
        Ok((0..self.inner.n).filter(|j| s >> j & 1 == 1).collect())
    }

    /// `(C0, C1, C)`.
    fn certificate_complexity(&self) -> (usize, usize, usize) {
        fns::certificate_complexity(&self.inner)
    }

    fn block_sensitivity(&self) -> usize {
        fns::block_sensitivity(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Function(n={}, q={}, |D|={})", self.inner.n, self.inner.q, self.inner.len())
    }
}

/// Adversary matrix with rows on positives and columns on negatives.
#[pyclass(name = "AdversaryMatrix", module = "adversarium")]
#[derive(Clone)]
struct PyAdversary {
    inner: AdversaryMatrix,
}

#[pymethods]
impl PyAdversary {
    #[new]
    fn new(rows: Vec<Vec<u8>>, cols: Vec<Vec<u8>>, m: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyAdversary { inner: AdversaryMatrix::new(rows, cols, to_mat(&m)?).map_err(err)? })
    }

    /// Hamming-1 pairs of threshold-k on n bits.
    #[staticmethod]
    fn threshold(k: usize, n: usize) -> PyResult<Self> {
        Ok(PyAdversary { inner: adv::threshold_relation_adversary(k, n).map_err(err)? })
    }

    /// The four-bit function with Γ built from class weights.
    #[staticmethod]
    fn ambainis(weights: [f64; 4]) -> Self {
        PyAdversary { inner: adv::ambainis_gamma(weights) }
    }

    /// Unit weight on every positive/negative pair at the given Hamming distance.
    #[staticmethod]
    #[pyo3(signature = (f, distance=1))]
    fn relation(f: &PyFunction, distance: usize) -> PyResult<Self> {
        let pick = |b: bool| f.inner.preimage(b).into_iter().map(|i| f.inner.domain[i].clone()).collect::<Vec<_>>();
        let rel = |x: &[u8], y: &[u8]| adv::hamming_distance(x, y) == distance;
        let inner = adv::relation_adversary(&f.inner, &pick(true), &pick(false), rel).map_err(err)?;
        Ok(PyAdversary { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.m)
    }

    /// `{norm, masked_norms, ratio}`; ratio is `inf` when every mask vanishes.
    fn ratio<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = adv::adv_ratio(&self.inner).map_err(err)?;
        let d = PyDict::new_bound(py);
        d.set_item("norm", r.norm)?;
        d.set_item("masked_norms", r.masked_norms)?;
        d.set_item("ratio", r.ratio)?;
        Ok(d)
    }
}

/// Feasible solution of the dual adversary program, as Gram factors.
#[pyclass(name = "DualSolution", module = "adversarium")]
#[derive(Clone)]
struct PyDual {
    inner: DualAdversarySolution,
}

#[pymethods]
impl PyDual {
    #[staticmethod]
    fn threshold(k: usize, n: usize) -> PyResult<Self> {
        Ok(PyDual { inner: dual::threshold_dual(k, n).map_err(err)? })
    }

    #[staticmethod]
    fn maj3() -> Self {
        PyDual { inner: dual::maj3_solution() }
    }

    #[staticmethod]
    fn from_json(text: &str, f: &PyFunction) -> PyResult<Self> {
        Ok(PyDual { inner: DualAdversarySolution::from_json(text, &f.inner).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn objective(&self) -> f64 {
        self.inner.objective()
    }

    fn max_violation(&self) -> f64 {
        self.inner.check_feasible().max_violation
    }

    #[getter]
    fn function(&self) -> PyFunction {
        PyFunction { inner: self.inner.f.clone() }
    }

    fn to_span_program(&self) -> PyResult<PySpan> {
        Ok(PySpan { inner: dual::to_span_program(&self.inner).map_err(err)? })
    }

    /// Acceptance and query count of one run of the walk on input `z`.
    #[pyo3(signature = (z, seed=0))]
    fn run(&self, z: Vec<u8>, seed: u64) -> PyResult<(bool, usize, f64)> {
        let o = qs::run_dual_adversary(&self.inner, &z, WalkConstants::default(), &mut seeded_rng(seed)).map_err(err)?;
        Ok((o.accept, o.queries, o.p_accept))
    }
}

/// Span program over the reals with labelled input vectors.
#[pyclass(name = "SpanProgram", module = "adversarium")]
#[derive(Clone)]
struct PySpan {
    inner: SpanProgram,
}

fn sizes_dict<'py>(py: Python<'py>, s: &sp::WitnessSizes) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    d.set_item("W0", s.w0)?;
    d.set_item("W1", s.w1)?;
    d.set_item("wsize", s.wsize)?;
    Ok(d)
}

#[pymethods]
impl PySpan {
    #[staticmethod]
    fn or_program(n: usize) -> Self {
        PySpan { inner: sp::or_program(n) }
    }

    /// Edge variables of the complete graph on `n` vertices, in pair order.
    #[staticmethod]
    fn st_connectivity(n: usize, s: usize, t: usize) -> PyResult<Self> {
        Ok(PySpan { inner: sp::st_connectivity_program(n, s, t).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PySpan { inner: SpanProgram::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    fn evaluate(&self, z: Vec<u8>) -> bool {
        sp::evaluate(&self.inner, &z)
    }

    fn span_residual(&self, z: Vec<u8>) -> f64 {
        sp::span_residual(&self.inner, &z)
    }

    /// `(coefficients, size)` of the least-norm positive witness.
    fn positive_witness(&self, z: Vec<u8>) -> PyResult<(Vec<f64>, f64)> {
        let w = sp::positive_witness(&self.inner, &z).map_err(err)?;
        Ok((w.vector, w.size))
    }

    /// `(w', ‖V* w'‖²)` of the optimal negative witness.
    fn negative_witness(&self, z: Vec<u8>) -> PyResult<(Vec<f64>, f64)> {
        let w = sp::negative_witness(&self.inner, &z).map_err(err)?;
        Ok((w.vector, w.size))
    }

    fn witness_size<'py>(&self, py: Python<'py>, f: &PyFunction) -> PyResult<Bound<'py, PyDict>> {
        let s = sp::witness_size(&self.inner, &f.inner, false).map_err(err)?;
        sizes_dict(py, &s)
    }

    /// Scales inputs by `alpha` and the target by `1/alpha`.
    fn rebalance(&self, alpha: f64) -> PyResult<Self> {
        Ok(PySpan { inner: sp::rebalance(&self.inner, alpha).map_err(err)? })
    }

    fn canonicalize(&self, f: &PyFunction) -> PyResult<Self> {
        Ok(PySpan { inner: sp::canonicalize(&self.inner, &f.inner).map_err(err)? })
    }

    fn to_dual(&self, f: &PyFunction) -> PyResult<PyDual> {
        Ok(PyDual { inner: dual::from_canonical_span_program(&self.inner, &f.inner).map_err(err)? })
    }

    /// One run of the phase-detection algorithm on `z`; witness sizes come
    /// from `f`. Returns `(accept, queries, p_accept)`.
    #[pyo3(signature = (f, z, seed=0))]
    fn run(&self, f: &PyFunction, z: Vec<u8>, seed: u64) -> PyResult<(bool, usize, f64)> {
        let p = sp::eliminate_free(&self.inner).map_err(err)?;
        let sizes = sp::witness_size(&p, &f.inner, false).map_err(err)?;
        let o = qs::run_span_program(&p, &z, sizes, WalkConstants::default(), &mut seeded_rng(seed)).map_err(err)?;
        Ok((o.accept, o.queries, o.p_accept))
    }
}

/// Learning graph together with its flow.
#[pyclass(name = "LearningGraph", module = "adversarium")]
#[derive(Clone)]
struct PyLg {
    graph: LearningGraph,
    flow: Flow,
}

fn lg(pair: (LearningGraph, Flow)) -> PyLg {
    PyLg { graph: pair.0, flow: pair.1 }
}

#[pymethods]
impl PyLg {
    #[staticmethod]
    fn trivial(n: usize) -> Self {
        lg(lgs::trivial_lg(n))
    }

    #[staticmethod]
    fn or_graph(n: usize) -> Self {
        lg(lgs::or_lg(n))
    }

    /// Loads `r` variables, then the `k` of a certificate.
    #[staticmethod]
    fn ksubset(n: usize, k: usize, r: usize) -> PyResult<Self> {
        Ok(lg(lgs::ksubset_lg(n, k, r).map_err(err)?))
    }

    #[staticmethod]
    fn collision(n: usize, r: usize) -> PyResult<Self> {
        Ok(lg(lgs::collision_lg(n, r).map_err(err)?))
    }

    #[staticmethod]
    fn triangle(vertices: usize, r1: usize, r2: usize, l: usize) -> PyResult<Self> {
        Ok(lg(lgs::triangle_lg(vertices, r1, r2, l).map_err(err)?))
    }

    #[getter]
    fn n(&self) -> usize {
        self.graph.n
    }

    fn arc_count(&self) -> usize {
        self.graph.arcs.len()
    }

    /// `{negative, positive, total}`.
    fn complexities<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = lgs::complexities(&self.graph, &self.flow).map_err(err)?;
        let d = PyDict::new_bound(py);
        d.set_item("negative", c.negative)?;
        d.set_item("positive", c.positive)?;
        d.set_item("total", c.total)?;
        Ok(d)
    }

    fn to_span_program(&self, f: &PyFunction) -> PyResult<PySpan> {
        Ok(PySpan { inner: lgs::to_span_program(&self.graph, &self.flow, &f.inner).map_err(err)? })
    }

    fn to_dual(&self, f: &PyFunction) -> PyResult<PyDual> {
        Ok(PyDual { inner: lgs::to_dual_adversary(&self.graph, &self.flow, &f.inner).map_err(err)? })
    }

    /// One run of the learning graph as an electric walk on `z`.
    #[pyo3(signature = (f, z, seed=0))]
    fn run(&self, f: &PyFunction, z: Vec<u8>, seed: u64) -> PyResult<(bool, usize, f64)> {
        let o = ew::lg_as_walk(&self.graph, &f.inner, &z, WalkConstants::default(), &mut seeded_rng(seed)).map_err(err)?;
        Ok((o.accept, o.queries, o.p_accept))
    }
}

/// Objective, worst constraint and normalised objective of the built-in dual
/// certificate for `ksubset` (with `k`), `or`, `trivial` or `hidden-shift`.
#[pyfunction]
#[pyo3(signature = (structure, n, k=1))]
fn dual_certificate<'py>(py: Python<'py>, structure: &str, n: usize, k: usize) -> PyResult<Bound<'py, PyDict>> {
    let (cert, alpha) = match structure {
        "ksubset" => {
            let c = CertificateStructure::k_subset(n, k);
            let a = DualLGCertificate::ksubset(&c, k);
            (c, a)
        }
        "or" => {
            let c = CertificateStructure::or(n);
            let a = DualLGCertificate::ksubset(&c, 1);
            (c, a)
        }
        "trivial" => {
            let c = CertificateStructure::trivial(n);
            let a = DualLGCertificate::ksubset(&c, n);
            (c, a)
        }
        "hidden-shift" => {
            let c = CertificateStructure::hidden_shift(n);
            let a = DualLGCertificate::hidden_shift(&c);
            (c, a)
        }
        other => return Err(PyValueError::new_err(format!("no built-in certificate for {other:?}"))),
    };
    let r = lgs::check_dual_certificate(&cert, &alpha).map_err(err)?;
    let d = PyDict::new_bound(py);
    d.set_item("objective", r.objective)?;
    d.set_item("max_constraint", r.max_constraint)?;
    d.set_item("normalized", r.normalized_objective())?;
    Ok(d)
}

/// Undirected graph with positive edge weights.
#[pyclass(name = "WeightedGraph", module = "adversarium")]
#[derive(Clone)]
struct PyGraph {
    inner: WeightedGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        Ok(PyGraph { inner: WeightedGraph::new(n, edges).map_err(err)? })
    }

    /// Lines of `u v w`; labels are vertex indices, `#` starts a comment.
    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: WeightedGraph::parse_edge_list(text).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    /// `(R, flows)` with flows in edge order.
    fn effective_resistance(&self, sigma: Vec<f64>, marked: Vec<usize>) -> PyResult<(f64, Vec<f64>)> {
        let (r, flow) = ew::effective_resistance(&self.inner, &sigma, &marked).map_err(err)?;
        Ok((r, flow.flows))
    }

    fn hitting_time(&self, sigma: Vec<f64>, marked: Vec<usize>) -> PyResult<f64> {
        ew::hitting_time(&self.inner, &sigma, &marked).map_err(err)
    }

    /// `(commute time, 2·W·R_{s,t})`.
    fn commute(&self, s: usize, t: usize) -> PyResult<(f64, f64)> {
        ew::commute_identity_check(&self.inner, s, t).map_err(err)
    }

    /// One run of the electric walk; `r_bound` defaults to `R_{σ,M}`.
    #[pyo3(signature = (sigma, marked, r_bound=None, seed=0))]
    fn walk(&self, sigma: Vec<f64>, marked: Vec<usize>, r_bound: Option<f64>, seed: u64) -> PyResult<(bool, usize, f64)> {
        let (g, s, m, _) = ew::walk_instance(&self.inner, &sigma, &marked).map_err(err)?;
        let r = match r_bound {
            Some(r) => r,
            None => ew::effective_resistance(&g, &s, &m).map_err(err)?.0,
        };
        let o = ew::electric_walk_run(&g, &s, &m, r, WalkConstants::default(), &mut seeded_rng(seed)).map_err(err)?;
        Ok((o.accept, o.steps, o.p_accept))
    }
}

/// Eigenphases of `(2ΠB − I)(2ΠA − I)` next to the prediction from the
/// singular values of `A*B`.
#[pyfunction]
fn reflection_spectrum<'py>(py: Python<'py>, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let r = qs::reflection_spectrum_check(&to_mat(&a)?, &to_mat(&b)?).map_err(err)?;
    let d = PyDict::new_bound(py);
    d.set_item("phases", r.phases)?;
    d.set_item("predicted", r.predicted)?;
    d.set_item("max_mismatch", r.max_mismatch)?;
    d.set_item("singular_values", r.singular_values)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "adversarium")]
fn adversarium_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", adversarium::VERSION)?;
    m.add_class::<PyFunction>()?;
    m.add_class::<PyAdversary>()?;
    m.add_class::<PyDual>()?;
    m.add_class::<PySpan>()?;
    m.add_class::<PyLg>()?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(dual_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(reflection_spectrum, m)?)?;
    Ok(())
}
